#include "posthoc/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "posthoc/metrics.hpp"

namespace posthoc {

Matrix weighted_mean(const PredictionSet& ps, const WeightVector& w) {
    if (static_cast<int>(w.size()) != ps.n_models)
        throw LengthMismatch("weighted_mean: weight vector length " + std::to_string(w.size()) +
                             " vs pool size " + std::to_string(ps.n_models));
    const std::size_t n = ps.n_instances;
    const std::size_t c = ps.n_classes;
    Matrix out(n, c, 0.0);
    double w_sum = 0.0;
    for (int b = 0; b < ps.n_models; ++b) {
        w_sum += w[b];
        if (w[b] == 0.0) continue;
        const double wb = w[b];
        const double* src = ps.probs.data() + static_cast<std::size_t>(b) * n * c;
        for (std::size_t t = 0; t < n * c; ++t) out.data[t] += wb * src[t];
    }
    if (std::abs(w_sum) > 1e-300) {
        for (double& v : out.data) v /= w_sum;
    }
    return out;
}

Matrix post_softmax(const Matrix& agg) {
    Matrix out(agg.rows, agg.cols);
    for (std::size_t i = 0; i < agg.rows; ++i) {
        const double* src = agg.row(i);
        double* dst = out.row(i);
        double mx = src[0];
        for (std::size_t k = 1; k < agg.cols; ++k) mx = std::max(mx, src[k]);
        if (!std::isfinite(mx))
            throw NonFiniteInput("post_softmax: non-finite entry in row " + std::to_string(i));
        double sum = 0.0;
        for (std::size_t k = 0; k < agg.cols; ++k) {
            if (!std::isfinite(src[k]))
                throw NonFiniteInput("post_softmax: non-finite entry in row " + std::to_string(i));
            dst[k] = std::exp(src[k] - mx);
            sum += dst[k];
        }
        for (std::size_t k = 0; k < agg.cols; ++k) dst[k] /= sum;
    }
    return out;
}

std::vector<int> predict_labels(const Matrix& agg) {
    std::vector<int> out(agg.rows);
    for (std::size_t i = 0; i < agg.rows; ++i) {
        const double* r = agg.row(i);
        int best = 0;
        for (std::size_t k = 1; k < agg.cols; ++k)
            if (r[k] > r[best]) best = static_cast<int>(k);
        out[i] = best;
    }
    return out;
}

double evaluate_weights(const PredictionSet& ps, const WeightVector& w, MetricKind metric,
                        EvalMode mode) {
    Matrix agg = weighted_mean(ps, w);
    if (metric == MetricKind::RocAuc && mode == EvalMode::RawCmaes)
        return loss_of(metric, ps.labels, post_softmax(agg));
    if (metric == MetricKind::BalancedAccuracy)
        return loss_of(metric, ps.labels, predict_labels(agg));
    return loss_of(metric, ps.labels, agg);
}

} // namespace posthoc
