#pragma once

#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// Result of a pre-aggregation weight normalization. w always lies on the
// probability simplex. For the GES-style normalizers the exact rational form
// is carried along: w[i] == reps[i] / denom with integer repetition counts,
// so pseudo-discreteness can be checked without tolerances. For the plain
// softmax normalizer reps is empty and denom is 0.
struct NormalizedWeights {
    std::vector<double> w;
    int n_hyp = 50;
    int nonzero_count = 0;
    std::vector<long long> reps;
    long long denom = 0;
};

// w_i = exp(raw_i) / sum_j exp(raw_j), max-subtracted.
NormalizedWeights softmax_norm(const std::vector<double>& raw);

// Softmax, then each entry rounded to the nearest fraction with denominator
// n_hyp; output entries are r_i / sum(r), which may use a denominator other
// than n_hyp. All repetitions zero falls back to the uniform vector.
NormalizedWeights implicit_ges_norm(const std::vector<double>& raw, int n_hyp = 50);

// Softmax, trim entries <= 0.5/n_hyp, round to repetition counts, then repair
// the counts so they sum to exactly n_hyp (decrement lowest-valued entries on
// overflow, distribute increments equally over nonzero entries on deficit).
// All entries trimmed falls back to the uniform vector.
NormalizedWeights explicit_ges_norm(const std::vector<double>& raw, int n_hyp = 50);

// floor(x + 0.5) for x >= 0. Values within 1e-9 of an exact half round up,
// so that halves produced by decimal inputs (e.g. 0.35 * 50) behave as halves
// despite binary representation error.
long long round_half_up(double x);

} // namespace posthoc
