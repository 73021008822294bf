#include "posthoc/ges.hpp"

#include <limits>
#include <numeric>

#include "posthoc/metrics.hpp"

namespace posthoc {

GesResult ges_fit(const PredictionSet& ps, MetricKind metric, int n_iters) {
    if (ps.n_models < 1) throw EmptyPool("ges_fit: empty model pool");
    if (n_iters < 1) throw Error("ges_fit: n_iters must be positive");

    const std::size_t cells = static_cast<std::size_t>(ps.n_instances) * ps.n_classes;
    std::vector<double> running_sum(cells, 0.0);  // sum of member predictions
    Matrix agg(ps.n_instances, ps.n_classes);

    GesResult res;
    res.best_loss = std::numeric_limits<double>::infinity();
    res.selection.reserve(n_iters);

    for (int iter = 1; iter <= n_iters; ++iter) {
        int best_model = -1;
        double best_cand_loss = std::numeric_limits<double>::infinity();
        const double inv = 1.0 / static_cast<double>(iter);
        for (int b = 0; b < ps.n_models; ++b) {
            const double* pb = ps.probs.data() + static_cast<std::size_t>(b) * cells;
            for (std::size_t t = 0; t < cells; ++t)
                agg.data[t] = (running_sum[t] + pb[t]) * inv;
            const double cand_loss = loss_of(metric, ps.labels, agg);
            if (cand_loss < best_cand_loss) {
                best_cand_loss = cand_loss;
                best_model = b;
            }
        }
        res.eval_count += ps.n_models;
        res.selection.push_back(best_model);
        const double* pb = ps.probs.data() + static_cast<std::size_t>(best_model) * cells;
        for (std::size_t t = 0; t < cells; ++t) running_sum[t] += pb[t];
        if (best_cand_loss < res.best_loss) {
            res.best_loss = best_cand_loss;
            res.n_selected = iter;
        }
    }

    res.counts.assign(ps.n_models, 0);
    for (int i = 0; i < res.n_selected; ++i) ++res.counts[res.selection[i]];
    res.weights = ges_weight_from_counts(res.counts, res.n_selected);
    return res;
}

WeightVector ges_weight_from_counts(const std::vector<int>& counts, int n) {
    const long long sum = std::accumulate(counts.begin(), counts.end(), 0LL);
    if (n <= 0 || sum != n)
        throw CountSumMismatch("ges_weight_from_counts: counts sum to " + std::to_string(sum) +
                               ", expected " + std::to_string(n));
    WeightVector w(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        w[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    return w;
}

} // namespace posthoc
