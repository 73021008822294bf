#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// Parameters for the synthetic benchmark generator. Each base model b emits
// softmax(signal_b * onehot(label) + rho_b * z_i + private_b * e_bi) where
// z_i is shared across models (correlated errors; rho carries a random sign,
// so anticorrelated pairs occur) and e_bi is model-private noise. A model
// whose noise terms are zero predicts the true class perfectly.
struct GenSpec {
    int n_datasets = 30;
    int n_folds = 10;
    int m_min = 6, m_max = 14;
    int c_min = 2, c_max = 5;      // even dataset indices are binary, odd draw c in [max(3,c_min), c_max]
    int n_val_min = 200, n_val_max = 300;
    int n_test_min = 400, n_test_max = 600;
    double signal_min = 1.0, signal_max = 3.0;
    double shared_noise_min = 0.2, shared_noise_max = 0.9;
    double private_noise_min = 0.7, private_noise_max = 2.2;
    bool complementary_pair = false;  // force models 0/1 into a strong anticorrelated pair
    std::uint64_t seed = 0;

    void validate() const;
};

// Writes one directory per dataset under out_root in the harness on-disk
// format. Deterministic: identical spec (incl. seed) yields identical bytes.
// Returns the generated dataset names.
std::vector<std::string> generate_synthetic(const GenSpec& spec,
                                            const std::filesystem::path& out_root);

} // namespace posthoc
