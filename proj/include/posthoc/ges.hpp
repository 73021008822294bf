#pragma once

#include <cstddef>
#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// Greedy ensemble selection with replacement. selection holds the model index
// appended at each iteration; counts/n_selected describe the best prefix (the
// returned model does not need to come from the final iteration).
struct GesResult {
    WeightVector weights;             // counts[i] / n_selected
    std::vector<int> counts;          // per-model repetitions in the best prefix
    int n_selected = 0;               // length of the best prefix
    double best_loss = 0.0;           // validation loss of the best prefix
    std::vector<int> selection;       // full greedy trajectory, one entry per iteration
    std::size_t eval_count = 0;       // always m * n_iters
};

// Each iteration evaluates all m candidate additions on the unweighted mean
// of the grown ensemble and appends the argmin (ties to the lowest model
// index). ROC AUC is scored on the mean directly; no softmax is applied.
GesResult ges_fit(const PredictionSet& ps, MetricKind metric, int n_iters = 50);

// w_i = counts_i / n. Throws CountSumMismatch unless the counts sum to n > 0.
WeightVector ges_weight_from_counts(const std::vector<int>& counts, int n);

} // namespace posthoc
