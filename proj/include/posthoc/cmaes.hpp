#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "posthoc/normalize.hpp"
#include "posthoc/rng.hpp"
#include "posthoc/types.hpp"

namespace posthoc {

// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
// rank-one + rank-mu covariance updates, positive recombination weights only.
struct CmaesParams {
    int n = 0;                 // dimension
    double sigma0 = 0.2;
    std::vector<double> x0;    // initial mean; zeros when empty
    int lambda = 0;            // 0 -> 4 + floor(3 ln n)
    std::uint64_t seed = 0;
};

class CmaesOptimizer {
public:
    explicit CmaesOptimizer(const CmaesParams& params);

    // Samples lambda candidates from N(mean, sigma^2 C). Deterministic given
    // the seed and the call index.
    const std::vector<std::vector<double>>& ask();

    // Ranks candidates by loss (stable on ties), recombines the mu best into
    // the new mean, and updates the evolution paths, covariance and step size.
    void tell(const std::vector<std::vector<double>>& candidates,
              const std::vector<double>& losses);

    int lambda() const { return lambda_; }
    double sigma() const { return sigma_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& covariance() const { return cov_; }  // row-major n x n
    const std::vector<double>& best_seen() const { return best_x_; }
    double best_loss() const { return best_loss_; }
    std::size_t eval_count() const { return eval_count_; }
    bool was_reset() const { return reset_happened_; }

    // Records an externally evaluated point (used to seed best_seen with x0).
    void observe(const std::vector<double>& x, double loss);

private:
    void refresh_eigensystem();
    void reset_distribution();

    int n_;
    int lambda_;
    int mu_;
    double mu_eff_;
    std::vector<double> rec_weights_;
    double c_sigma_, d_sigma_, c_c_, c_1_, c_mu_, chi_n_;
    int eig_refresh_period_;

    double sigma0_;
    double sigma_;
    std::vector<double> mean_;
    std::vector<double> cov_;       // C, row-major
    std::vector<double> eig_vecs_;  // B, row-major (columns are eigenvectors)
    std::vector<double> eig_sqrt_;  // D = sqrt(eigenvalues)
    std::vector<double> p_sigma_, p_c_;
    int tells_since_eig_;
    std::size_t iteration_;
    std::size_t eval_count_;
    bool reset_happened_;

    Rng rng_;
    std::vector<std::vector<double>> pending_;

    std::vector<double> best_x_;
    double best_loss_;
};

enum class Normalizer { None, Softmax, ImplicitGes, ExplicitGes };

struct EnsembleFitResult {
    WeightVector weights;           // normalized when a normalizer is active
    double best_loss = 0.0;         // loss of the returned vector
    double x0_loss = 0.0;           // loss of the one-hot init under the same evaluation
    std::size_t eval_count = 0;     // m * n_iters, exactly, when that is >= 1
    std::vector<long long> reps;    // repetition counts (Implicit/ExplicitGes only)
    long long denom = 0;
};

// Searches a weight vector over the pool with CMA-ES: one-hot init on the
// single best model, sigma0 default 0.2, budget of m * n_iters loss
// evaluations with the final generation truncated to exhaust it exactly.
// Candidates are normalized before aggregation when a normalizer is given,
// otherwise scored raw (softmax after aggregation for ROC AUC).
EnsembleFitResult cmaes_fit_ensemble(const PredictionSet& ps, MetricKind metric,
                                     Normalizer normalizer, std::uint64_t seed,
                                     int n_iters = 50, double sigma0 = 0.2, int n_hyp = 50);

} // namespace posthoc
