#pragma once

#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// Mean of per-class recall over the classes that appear in `labels`.
Score balanced_accuracy(const std::vector<int>& labels, const std::vector<int>& predicted);

// Mann-Whitney statistic via midranks, O(n log n); ties count 0.5.
// labels must contain both 0 and 1; scores are the class-1 values.
Score roc_auc_binary(const std::vector<int>& labels, const std::vector<double>& scores);

// Unweighted mean over classes k of roc_auc_binary(labels == k, probs[:,k]).
// c == 2 delegates to roc_auc_binary on the class-1 column. Every class in
// [0, c) must appear in labels.
Score roc_auc_macro_ovr(const std::vector<int>& labels, const Matrix& probs);

// The loss L minimized by every optimizer: 1 - score. The aggregated
// predictions are probabilities [n x c]; balanced accuracy takes their argmax.
double loss_of(MetricKind metric, const std::vector<int>& labels, const Matrix& agg_probs);

// Label-input variant, only meaningful for BalancedAccuracy.
double loss_of(MetricKind metric, const std::vector<int>& labels,
               const std::vector<int>& predicted);

} // namespace posthoc
