#include "posthoc/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace posthoc {

namespace {

double row_sum(const double* p, int c) {
    double s = 0.0;
    for (int k = 0; k < c; ++k) s += p[k];
    return s;
}

// Renormalizes a nonnegative row so its left-to-right sum is exactly 1.0.
// One division by the row sum, then the largest entry absorbs the residual
// until the sum lands on 1.0 (usually 0-2 corrections).
void renormalize_exact(double* p, int c) {
    const double s = row_sum(p, c);
    if (s != 1.0) {
        for (int k = 0; k < c; ++k) p[k] /= s;
    }
    for (int iter = 0; iter < 64; ++iter) {
        const double s2 = row_sum(p, c);
        if (s2 == 1.0) return;
        int j = static_cast<int>(std::max_element(p, p + c) - p);
        p[j] -= (s2 - 1.0);
    }
    throw Error("renormalize_exact: failed to reach an exact unit sum");
}

} // namespace

PredictionSet validate_prediction_set(const std::vector<double>& flat_probs,
                                      const std::vector<int>& labels,
                                      const std::vector<std::string>& model_names,
                                      int n_models, int n_classes) {
    if (n_models < 1) throw ModelCountMismatch("pool must contain at least one model");
    if (n_classes < 2) throw Error("n_classes must be >= 2");
    if (static_cast<int>(model_names.size()) != n_models)
        throw ModelCountMismatch("expected " + std::to_string(n_models) + " model names, got " +
                                 std::to_string(model_names.size()));
    {
        std::set<std::string> uniq(model_names.begin(), model_names.end());
        if (static_cast<int>(uniq.size()) != n_models)
            throw ModelCountMismatch("model names must be distinct");
    }

    const std::size_t n = labels.size();
    if (n == 0) throw Error("prediction set must contain at least one instance");
    if (flat_probs.size() != n * static_cast<std::size_t>(n_models) * n_classes)
        throw ModelCountMismatch("probability cell count " + std::to_string(flat_probs.size()) +
                                 " does not match " + std::to_string(n) + " instances x " +
                                 std::to_string(n_models) + " models x " +
                                 std::to_string(n_classes) + " classes");

    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw LabelRangeError("label " + std::to_string(labels[i]) + " of instance " +
                                  std::to_string(i) + " outside [0, " +
                                  std::to_string(n_classes) + ")");
    }

    PredictionSet ps;
    ps.n_models = n_models;
    ps.n_instances = static_cast<int>(n);
    ps.n_classes = n_classes;
    ps.labels = labels;
    ps.model_names = model_names;
    ps.probs.resize(flat_probs.size());

    // transpose instance-major input into model-major storage, validating rows
    for (std::size_t i = 0; i < n; ++i) {
        for (int b = 0; b < n_models; ++b) {
            const double* src = flat_probs.data() + (i * n_models + b) * n_classes;
            double* dst =
                ps.probs.data() + (static_cast<std::size_t>(b) * n + i) * n_classes;
            double s = 0.0;
            for (int k = 0; k < n_classes; ++k) {
                const double v = src[k];
                if (!(v >= 0.0 && v <= 1.0))
                    throw ProbRangeError("probability " + std::to_string(v) + " of instance " +
                                         std::to_string(i) + ", model " + std::to_string(b) +
                                         " outside [0, 1]");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-6)
                throw RowSumError("probability row of instance " + std::to_string(i) +
                                  ", model " + std::to_string(b) + " sums to " +
                                  std::to_string(s));
            std::copy(src, src + n_classes, dst);
            renormalize_exact(dst, n_classes);
        }
    }
    return ps;
}

void require_pool_size(const PredictionSet& ps, int min_models, const std::string& method) {
    if (ps.n_models < min_models)
        throw ModelCountMismatch(method + " requires at least " + std::to_string(min_models) +
                                 " base models, pool has " + std::to_string(ps.n_models));
}

} // namespace posthoc
