#include <doctest.h>

#include "posthoc/types.hpp"
#include "test_helpers.hpp"

using namespace posthoc;

namespace {

double row_sum(const PredictionSet& ps, int b, int i) {
    double s = 0.0;
    for (int k = 0; k < ps.n_classes; ++k) s += ps.prob(b, i, k);
    return s;
}

} // namespace

TEST_SUITE("core") {

TEST_CASE("task kind binary iff two classes") {
    CHECK(TaskKind::from_classes(2).kind == TaskType::Binary);
    CHECK(TaskKind::from_classes(3).kind == TaskType::MultiClass);
    CHECK_THROWS_AS(TaskKind::from_classes(1), Error);
}

TEST_CASE("clean row accepted unchanged") {
    const std::vector<double> flat = {0.5, 0.5};
    const PredictionSet ps = validate_prediction_set(flat, {1}, {"m0"}, 1, 2);
    CHECK(ps.prob(0, 0, 0) == 0.5);
    CHECK(ps.prob(0, 0, 1) == 0.5);
}

TEST_CASE("row sum violation rejected") {
    CHECK_THROWS_AS(validate_prediction_set({0.7, 0.7}, {0}, {"m0"}, 1, 2), RowSumError);
}

TEST_CASE("entries outside the unit interval rejected") {
    CHECK_THROWS_AS(validate_prediction_set({1.2, -0.2}, {0}, {"m0"}, 1, 2), ProbRangeError);
}

TEST_CASE("label range enforced") {
    CHECK_THROWS_AS(validate_prediction_set({0.5, 0.5}, {2}, {"m0"}, 1, 2), LabelRangeError);
    CHECK_THROWS_AS(validate_prediction_set({0.5, 0.5}, {-1}, {"m0"}, 1, 2), LabelRangeError);
}

TEST_CASE("cell count and name mismatches") {
    CHECK_THROWS_AS(validate_prediction_set({0.5, 0.5}, {0}, {"m0", "m1"}, 2, 2),
                    ModelCountMismatch);
    CHECK_THROWS_AS(validate_prediction_set({0.5, 0.5, 0.5, 0.5}, {0}, {"m0", "m0"}, 2, 2),
                    ModelCountMismatch);
}

TEST_CASE("single-model pool accepted here, rejected for ensembling") {
    const PredictionSet ps = validate_prediction_set({0.9, 0.1}, {0}, {"m0"}, 1, 2);
    CHECK(ps.n_models == 1);
    CHECK_NOTHROW(require_pool_size(ps, 1, "single-best"));
    CHECK_THROWS_AS(require_pool_size(ps, 2, "cmaes"), ModelCountMismatch);
}

TEST_CASE("renormalization lands on an exactly unit sum") {
    Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const int c = static_cast<int>(rng.uniform_int(2, 7));
        std::vector<double> flat(c);
        double s = 0.0;
        for (int k = 0; k < c; ++k) {
            flat[k] = rng.uniform();
            s += flat[k];
        }
        // perturb the normalization within the ingest tolerance
        const double target = 1.0 + rng.uniform(-9e-7, 9e-7);
        for (int k = 0; k < c; ++k) flat[k] *= target / s;
        const PredictionSet ps = validate_prediction_set(flat, {0}, {"m0"}, 1, c);
        CHECK(row_sum(ps, 0, 0) == 1.0);
        for (int k = 0; k < c; ++k) {
            CHECK(ps.prob(0, 0, k) >= 0.0);
            CHECK(ps.prob(0, 0, k) <= 1.0);
        }
    }
}

TEST_CASE("random generator helper produces exact sums everywhere") {
    Rng rng(7);
    const PredictionSet ps = test::random_prediction_set(rng, 4, 40, 3);
    for (int b = 0; b < ps.n_models; ++b)
        for (int i = 0; i < ps.n_instances; ++i) CHECK(row_sum(ps, b, i) == 1.0);
}

} // TEST_SUITE
