#include <doctest.h>

#include <cmath>
#include <limits>

#include "posthoc/aggregate.hpp"
#include "posthoc/ges.hpp"
#include "posthoc/metrics.hpp"
#include "test_helpers.hpp"

using namespace posthoc;

namespace {

// Step-wise brute-force oracle: re-evaluates every candidate from scratch
// each iteration by averaging the member list directly.
struct OracleResult {
    std::vector<int> selection;
    std::vector<int> counts;
    int n_selected = 0;
    double best_loss = std::numeric_limits<double>::infinity();
};

OracleResult ges_oracle(const PredictionSet& ps, MetricKind metric, int n_iters) {
    OracleResult res;
    std::vector<int> members;
    for (int iter = 1; iter <= n_iters; ++iter) {
        int best_model = -1;
        double best_loss = std::numeric_limits<double>::infinity();
        for (int b = 0; b < ps.n_models; ++b) {
            std::vector<int> cand = members;
            cand.push_back(b);
            Matrix agg(ps.n_instances, ps.n_classes, 0.0);
            for (int e : cand)
                for (int i = 0; i < ps.n_instances; ++i)
                    for (int k = 0; k < ps.n_classes; ++k) agg(i, k) += ps.prob(e, i, k);
            for (double& v : agg.data) v /= static_cast<double>(cand.size());
            const double l = loss_of(metric, ps.labels, agg);
            if (l < best_loss) {
                best_loss = l;
                best_model = b;
            }
        }
        members.push_back(best_model);
        res.selection.push_back(best_model);
        if (best_loss < res.best_loss) {
            res.best_loss = best_loss;
            res.n_selected = iter;
        }
    }
    res.counts.assign(ps.n_models, 0);
    for (int i = 0; i < res.n_selected; ++i) ++res.counts[res.selection[i]];
    return res;
}

} // namespace

TEST_SUITE("ges") {

TEST_CASE("single-model pool returns weight one") {
    Rng rng(51);
    const PredictionSet ps = test::random_prediction_set(rng, 1, 10, 2);
    const GesResult res = ges_fit(ps, MetricKind::BalancedAccuracy, 5);
    CHECK(res.weights == WeightVector{1.0});
    CHECK(res.selection == std::vector<int>{0, 0, 0, 0, 0});
    CHECK(res.eval_count == 5);
}

TEST_CASE("identical models tie-break to index zero") {
    std::vector<double> flat;
    std::vector<int> labels;
    Rng rng(52);
    for (int i = 0; i < 12; ++i) {
        const double p = rng.uniform(0.1, 0.9);
        flat.insert(flat.end(), {p, 1.0 - p, p, 1.0 - p});
        labels.push_back(static_cast<int>(rng.uniform_int(0, 1)));
    }
    labels[0] = 0;
    labels[1] = 1;
    const PredictionSet ps = validate_prediction_set(flat, labels, {"a", "b"}, 2, 2);
    const GesResult res = ges_fit(ps, MetricKind::RocAuc, 4);
    for (int s : res.selection) CHECK(s == 0);
    CHECK(res.n_selected == 1);
    CHECK(res.weights == WeightVector{1.0, 0.0});
}

TEST_CASE("constructed instance where averaging two models wins") {
    // model 0 nails class 0, model 1 nails class 1, model 2 is useless;
    // the mean of 0 and 1 classifies everything correctly
    const std::vector<std::vector<double>> model_rows = {
        // instance rows per model: class-0 instances then class-1 instances
        {0.9, 0.1, 0.55, 0.45},  // model 0: confident on 0, weakly wrong side on 1
        {0.45, 0.55, 0.1, 0.9},  // model 1: mirror image
        {0.5, 0.5, 0.5, 0.5},    // model 2: uninformative
    };
    std::vector<double> flat;
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) {
        const int cls = i < 2 ? 0 : 1;
        // alternate which instance pattern is used so labels vary
        for (int b = 0; b < 3; ++b) {
            const double p0 = model_rows[b][cls == 0 ? 0 : 2];
            const double p1 = model_rows[b][cls == 0 ? 1 : 3];
            flat.push_back(p0);
            flat.push_back(p1);
        }
        labels.push_back(cls);
    }
    const PredictionSet ps = validate_prediction_set(flat, labels, {"a", "b", "c"}, 3, 2);

    // model 0 alone misclassifies nothing on class 0 but everything... check
    // against the oracle instead of hand-waving
    const GesResult res = ges_fit(ps, MetricKind::BalancedAccuracy, 3);
    const OracleResult oracle = ges_oracle(ps, MetricKind::BalancedAccuracy, 3);
    CHECK(res.selection == oracle.selection);
    CHECK(res.counts == oracle.counts);
    CHECK(res.best_loss == 0.0);  // the 0+1 average separates perfectly
    CHECK(res.counts[2] == 0);
}

TEST_CASE("weights from counts") {
    CHECK(ges_weight_from_counts({2, 1, 0}, 3) ==
          WeightVector{2.0 / 3.0, 1.0 / 3.0, 0.0});
    CHECK(ges_weight_from_counts({5, 0, 0}, 5) == WeightVector{1.0, 0.0, 0.0});
    CHECK_THROWS_AS(ges_weight_from_counts({0, 0}, 0), CountSumMismatch);
    CHECK_THROWS_AS(ges_weight_from_counts({1, 1}, 3), CountSumMismatch);
}

TEST_CASE("trajectory matches the brute-force oracle") {
    Rng rng(53);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + static_cast<int>(rng.uniform_int(0, 3));
        const int n_iters = 1 + static_cast<int>(rng.uniform_int(0, 3));
        const int c = 2 + static_cast<int>(rng.uniform_int(0, 1));
        const int n = c + static_cast<int>(rng.uniform_int(0, 30 - c));
        const MetricKind metric =
            trial % 2 == 0 ? MetricKind::BalancedAccuracy : MetricKind::RocAuc;
        const PredictionSet ps = test::random_prediction_set(rng, m, n, c, 1.0);

        const GesResult res = ges_fit(ps, metric, n_iters);
        const OracleResult oracle = ges_oracle(ps, metric, n_iters);
        REQUIRE(res.selection == oracle.selection);
        REQUIRE(res.counts == oracle.counts);
        REQUIRE(res.n_selected == oracle.n_selected);
        REQUIRE(res.best_loss == oracle.best_loss);
        REQUIRE(res.eval_count == static_cast<std::size_t>(m) * n_iters);
    }
}

TEST_CASE("pseudo-discrete structure of the output") {
    Rng rng(54);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + static_cast<int>(rng.uniform_int(0, 5));
        const PredictionSet ps = test::random_prediction_set(rng, m, 40, 2);
        const GesResult res = ges_fit(ps, MetricKind::RocAuc, 12);
        long long count_sum = 0;
        for (std::size_t i = 0; i < res.weights.size(); ++i) {
            REQUIRE(res.weights[i] ==
                    static_cast<double>(res.counts[i]) / static_cast<double>(res.n_selected));
            count_sum += res.counts[i];
        }
        REQUIRE(count_sum == res.n_selected);
    }
}

TEST_CASE("incremental mean equals recomputation") {
    Rng rng(55);
    const PredictionSet ps = test::random_prediction_set(rng, 5, 25, 3);
    const GesResult res = ges_fit(ps, MetricKind::RocAuc, 10);
    // rebuild the mean over the full trajectory from scratch
    Matrix agg(ps.n_instances, ps.n_classes, 0.0);
    for (int e : res.selection)
        for (int i = 0; i < ps.n_instances; ++i)
            for (int k = 0; k < ps.n_classes; ++k) agg(i, k) += ps.prob(e, i, k);
    for (double& v : agg.data) v /= static_cast<double>(res.selection.size());
    // and compare against the weighted mean of the trajectory's counts
    std::vector<int> full_counts(ps.n_models, 0);
    for (int e : res.selection) ++full_counts[e];
    const Matrix via_weights =
        weighted_mean(ps, ges_weight_from_counts(full_counts, static_cast<int>(res.selection.size())));
    for (std::size_t t = 0; t < agg.data.size(); ++t)
        CHECK(std::abs(agg.data[t] - via_weights.data[t]) <= 1e-12);
}

} // TEST_SUITE
