#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "posthoc/aggregate.hpp"
#include "posthoc/cmaes.hpp"
#include "test_helpers.hpp"

using namespace posthoc;

namespace {

double sphere(const std::vector<double>& x, const std::vector<double>& center) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - center[i];
        s += d * d;
    }
    return s;
}

double run_sphere(int n, std::uint64_t seed, std::size_t budget, double sigma0) {
    Rng rng(seed * 977 + 3);
    std::vector<double> center(n);
    for (double& v : center) v = rng.uniform(-1.0, 1.0);

    CmaesParams params;
    params.n = n;
    params.sigma0 = sigma0;
    params.seed = seed;
    CmaesOptimizer opt(params);
    std::size_t used = 0;
    while (used + opt.lambda() <= budget) {
        const auto& cands = opt.ask();
        std::vector<double> losses(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) losses[i] = sphere(cands[i], center);
        opt.tell(cands, losses);
        used += cands.size();
    }
    return opt.best_loss();
}

} // namespace

TEST_SUITE("cmaes") {

TEST_CASE("fixed seed gives identical candidate streams") {
    CmaesParams params;
    params.n = 4;
    params.seed = 123;
    CmaesOptimizer a(params), b(params);
    for (int gen = 0; gen < 3; ++gen) {
        const auto ca = a.ask();
        const auto cb = b.ask();
        REQUIRE(ca == cb);
        std::vector<double> losses(ca.size());
        for (std::size_t i = 0; i < ca.size(); ++i) losses[i] = sphere(ca[i], {0, 0, 0, 0});
        a.tell(ca, losses);
        b.tell(cb, losses);
    }
}

TEST_CASE("sample covariance matches sigma^2 I") {
    CmaesParams params;
    params.n = 2;
    params.sigma0 = 0.7;
    params.seed = 9;
    params.lambda = 10;
    CmaesOptimizer opt(params);
    double sum[2] = {0, 0};
    double cov[2][2] = {{0, 0}, {0, 0}};
    const int draws = 100000;
    std::vector<std::vector<double>> all;
    all.reserve(draws);
    while (static_cast<int>(all.size()) < draws) {
        const auto& cands = opt.ask();
        for (const auto& x : cands) all.push_back(x);
    }
    all.resize(draws);
    for (const auto& x : all)
        for (int i = 0; i < 2; ++i) sum[i] += x[i];
    for (int i = 0; i < 2; ++i) sum[i] /= draws;
    for (const auto& x : all)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) cov[i][j] += (x[i] - sum[i]) * (x[j] - sum[j]);
    const double s2 = 0.7 * 0.7;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            cov[i][j] /= draws;
            if (i == j)
                CHECK(std::abs(cov[i][j] - s2) <= 0.05 * s2);
            else
                CHECK(std::abs(cov[i][j]) <= 0.05 * s2);
        }
}

TEST_CASE("equal losses recombine the first mu candidates") {
    CmaesParams params;
    params.n = 3;
    params.seed = 77;
    CmaesOptimizer opt(params);
    const auto cands = opt.ask();
    const std::vector<double> losses(cands.size(), 1.0);
    opt.tell(cands, losses);
    // stable sort keeps submission order, so the mean is the weighted
    // recombination of the first mu candidates
    const int mu = static_cast<int>(cands.size()) / 2;
    std::vector<double> w(mu);
    double wsum = 0.0;
    for (int i = 0; i < mu; ++i) {
        w[i] = std::log((cands.size() + 1.0) / 2.0) - std::log(i + 1.0);
        wsum += w[i];
    }
    for (int i = 0; i < 3; ++i) {
        double expect = 0.0;
        for (int r = 0; r < mu; ++r) expect += w[r] / wsum * cands[r][i];
        CHECK(opt.mean()[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("best-seen loss never increases") {
    CmaesParams params;
    params.n = 3;
    params.seed = 5;
    CmaesOptimizer opt(params);
    double prev = opt.best_loss();
    for (int gen = 0; gen < 20; ++gen) {
        const auto& cands = opt.ask();
        std::vector<double> losses(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) losses[i] = sphere(cands[i], {1, -1, 0.5});
        opt.tell(cands, losses);
        CHECK(opt.best_loss() <= prev);
        prev = opt.best_loss();
    }
    CHECK_THROWS_AS(opt.tell(opt.ask(), std::vector<double>(opt.lambda(), std::nan(""))),
                    NonFiniteLoss);
}

TEST_CASE("covariance stays symmetric") {
    CmaesParams params;
    params.n = 5;
    params.seed = 31;
    CmaesOptimizer opt(params);
    for (int gen = 0; gen < 30; ++gen) {
        const auto& cands = opt.ask();
        std::vector<double> losses(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i)
            losses[i] = sphere(cands[i], {0.3, 0.3, 0.3, 0.3, 0.3});
        opt.tell(cands, losses);
        const auto& c = opt.covariance();
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                CHECK(std::abs(c[i * 5 + j] - c[j * 5 + i]) <= 1e-12);
    }
}

TEST_CASE("sphere converges deep with a large budget") {
    CHECK(run_sphere(5, 42, 5000, 0.3) < 1e-9);
}

TEST_CASE("sphere benchmark across dimensions and seeds") {
    for (int n : {2, 5, 10}) {
        std::vector<double> finals;
        for (std::uint64_t seed = 1; seed <= 10; ++seed)
            finals.push_back(run_sphere(n, seed, static_cast<std::size_t>(200) * n, 0.3));
        std::sort(finals.begin(), finals.end());
        const double median = 0.5 * (finals[4] + finals[5]);
        CAPTURE(n);
        CHECK(median < 1e-6);
    }
}

TEST_CASE("ensemble driver contracts") {
    Rng rng(61);
    const PredictionSet ps = test::random_prediction_set(rng, 4, 60, 2);

    SUBCASE("budget is exhausted exactly and x0 is never beaten by nothing") {
        for (const Normalizer norm : {Normalizer::None, Normalizer::Softmax,
                                      Normalizer::ImplicitGes, Normalizer::ExplicitGes}) {
            const EnsembleFitResult res =
                cmaes_fit_ensemble(ps, MetricKind::RocAuc, norm, 99, 50, 0.2, 50);
            CHECK(res.eval_count == 4 * 50);
            CHECK(res.best_loss <= res.x0_loss);
        }
    }

    SUBCASE("identical seeds reproduce the result") {
        const EnsembleFitResult a =
            cmaes_fit_ensemble(ps, MetricKind::BalancedAccuracy, Normalizer::None, 7);
        const EnsembleFitResult b =
            cmaes_fit_ensemble(ps, MetricKind::BalancedAccuracy, Normalizer::None, 7);
        CHECK(a.weights == b.weights);
        CHECK(a.eval_count == b.eval_count);
        CHECK(a.best_loss == b.best_loss);
    }

    SUBCASE("explicit-ges output is simplex and pseudo-discrete") {
        const EnsembleFitResult res =
            cmaes_fit_ensemble(ps, MetricKind::RocAuc, Normalizer::ExplicitGes, 11);
        REQUIRE(res.denom == 50);
        long long total = 0;
        for (std::size_t i = 0; i < res.weights.size(); ++i) {
            CHECK(res.weights[i] == static_cast<double>(res.reps[i]) / 50.0);
            total += res.reps[i];
        }
        CHECK(total == 50);
    }

    SUBCASE("tiny budget runs one truncated generation") {
        const EnsembleFitResult res =
            cmaes_fit_ensemble(ps, MetricKind::RocAuc, Normalizer::None, 3, 1);
        CHECK(res.eval_count == 4);  // m * n_iters with n_iters = 1
        CHECK(res.best_loss <= res.x0_loss);
    }

    SUBCASE("single-model pool is rejected") {
        Rng rng2(62);
        const PredictionSet one = test::random_prediction_set(rng2, 1, 10, 2);
        CHECK_THROWS_AS(cmaes_fit_ensemble(one, MetricKind::RocAuc, Normalizer::None, 1),
                        ModelCountMismatch);
    }
}

TEST_CASE("x0 is the one-hot of the single best model") {
    // model 1 is made strictly better than the rest; with a one-generation
    // budget the returned best must at least match the injected x0
    std::vector<double> flat;
    std::vector<int> labels;
    Rng rng(63);
    for (int i = 0; i < 30; ++i) {
        const int y = static_cast<int>(rng.uniform_int(0, 1));
        labels.push_back(y);
        for (int b = 0; b < 2; ++b) {
            double p1 = b == 1 ? (y == 1 ? 0.9 : 0.1) : rng.uniform(0.3, 0.7);
            flat.push_back(1.0 - p1);
            flat.push_back(p1);
        }
    }
    labels[0] = 0;
    labels[1] = 1;
    const PredictionSet ps = validate_prediction_set(flat, labels, {"noise", "good"}, 2, 2);
    const double single_best_loss =
        evaluate_weights(ps, {0.0, 1.0}, MetricKind::RocAuc, EvalMode::Normalized);
    const EnsembleFitResult res =
        cmaes_fit_ensemble(ps, MetricKind::RocAuc, Normalizer::None, 17);
    // binary ROC AUC is rank-based, so the raw path's softmax does not move
    // the one-hot loss away from the plain single-model loss
    CHECK(res.x0_loss == doctest::Approx(single_best_loss).epsilon(1e-12));
    CHECK(res.best_loss <= res.x0_loss);
}

} // TEST_SUITE
