#pragma once

#include "posthoc/types.hpp"

namespace posthoc {

// How a weight vector is turned into scoreable predictions.
//   RawCmaes:   unconstrained weights; ROC AUC sees a rowwise softmax of the
//               aggregated values, balanced accuracy sees their argmax.
//   Normalized: weights already lie on the probability simplex, so the
//               weighted mean is itself a probability matrix.
enum class EvalMode { RawCmaes, Normalized };

// out[i,k] = sum_b w[b]*probs[b,i,k] / sum_b w[b]. A weight sum of zero (or
// denormal) skips the division and returns the raw weighted sums, to keep
// losses finite for degenerate optimizer proposals.
Matrix weighted_mean(const PredictionSet& ps, const WeightVector& w);

// Rowwise softmax with max subtraction.
Matrix post_softmax(const Matrix& agg);

// Rowwise argmax; ties break to the lowest class index.
std::vector<int> predict_labels(const Matrix& agg);

// The loss L(P, W) seen by the optimizers.
double evaluate_weights(const PredictionSet& ps, const WeightVector& w, MetricKind metric,
                        EvalMode mode);

} // namespace posthoc
