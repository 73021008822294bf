#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "posthoc/metrics.hpp"
#include "test_helpers.hpp"

using namespace posthoc;

namespace {

// O(n^2) pair counting, the oracle roc_auc_binary is checked against
double auc_pair_counting(const std::vector<int>& labels, const std::vector<double>& scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("balanced accuracy basics") {
    CHECK(balanced_accuracy({0, 1}, {0, 1}).value == 1.0);
    CHECK(balanced_accuracy({0, 0, 1, 1}, {0, 1, 1, 1}).value == 0.75);
    CHECK(balanced_accuracy({0, 1, 2}, {0, 0, 0}).value == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK_THROWS_AS(balanced_accuracy({}, {}), EmptyInput);
}

TEST_CASE("balanced accuracy averages only over classes present") {
    // class 1 absent from labels: recalls of classes 0 and 2 only
    CHECK(balanced_accuracy({0, 2, 2}, {0, 2, 0}).value == 0.75);
}

TEST_CASE("balanced accuracy invariant under instance permutation") {
    Rng rng(3);
    std::vector<int> labels, pred;
    for (int i = 0; i < 60; ++i) {
        labels.push_back(static_cast<int>(rng.uniform_int(0, 2)));
        pred.push_back(static_cast<int>(rng.uniform_int(0, 2)));
    }
    labels[0] = 0; labels[1] = 1; labels[2] = 2;
    const double before = balanced_accuracy(labels, pred).value;
    std::vector<std::size_t> perm(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);
    std::vector<int> pl(labels.size()), pp(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        pl[i] = labels[perm[i]];
        pp[i] = pred[perm[i]];
    }
    CHECK(balanced_accuracy(pl, pp).value == before);
}

TEST_CASE("binary auc basics") {
    CHECK(roc_auc_binary({0, 1}, {0.1, 0.9}).value == 1.0);
    CHECK(roc_auc_binary({0, 0, 1, 1}, {0.1, 0.4, 0.35, 0.8}).value == 0.75);
    CHECK(roc_auc_binary({0, 1}, {0.5, 0.5}).value == 0.5);
    CHECK_THROWS_AS(roc_auc_binary({1, 1}, {0.2, 0.3}), SingleClassError);
}

TEST_CASE("binary auc equals pair counting with ties") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(0, 198));
        std::vector<int> labels(n);
        std::vector<double> scores(n);
        for (int i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.uniform_int(0, 1));
            // coarse grid guarantees plenty of exact ties
            scores[i] = rng.uniform() < 0.5 ? rng.uniform()
                                            : static_cast<double>(rng.uniform_int(0, 8)) / 8.0;
        }
        labels[0] = 0;
        labels[1] = 1;
        const double fast = roc_auc_binary(labels, scores).value;
        const double slow = auc_pair_counting(labels, scores);
        CHECK(std::abs(fast - slow) <= 1e-12);
    }
}

TEST_CASE("binary auc complement and monotone-invariance properties") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_int(0, 95));
        std::vector<int> labels(n);
        std::vector<double> scores(n), neg(n), warped(n);
        for (int i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.uniform_int(0, 1));
            scores[i] = rng.uniform();  // continuous: ties have probability 0
            neg[i] = -scores[i];
            warped[i] = std::exp(3.0 * scores[i]) + 7.0;
        }
        labels[0] = 0;
        labels[1] = 1;
        const double auc = roc_auc_binary(labels, scores).value;
        CHECK(roc_auc_binary(labels, neg).value == doctest::Approx(1.0 - auc).epsilon(1e-12));
        CHECK(roc_auc_binary(labels, warped).value == doctest::Approx(auc).epsilon(1e-12));
    }
}

TEST_CASE("macro ovr auc") {
    SUBCASE("one-hot probabilities match labels") {
        Matrix probs(3, 3, 0.0);
        const std::vector<int> labels = {0, 1, 2};
        for (int i = 0; i < 3; ++i) probs(i, labels[i]) = 1.0;
        CHECK(roc_auc_macro_ovr(labels, probs).value == 1.0);
    }
    SUBCASE("uniform probabilities are chance level") {
        Matrix probs(6, 3, 1.0 / 3.0);
        CHECK(roc_auc_macro_ovr({0, 1, 2, 0, 1, 2}, probs).value == 0.5);
    }
    SUBCASE("hand instance against per-class pair counting") {
        const std::vector<int> labels = {0, 1, 2, 0};
        Matrix probs(4, 3);
        const double rows[4][3] = {{.8, .1, .1}, {.2, .6, .2}, {.3, .3, .4}, {.4, .5, .1}};
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 3; ++k) probs(i, k) = rows[i][k];
        double expect = 0.0;
        for (int k = 0; k < 3; ++k) {
            std::vector<int> ovr(4);
            std::vector<double> col(4);
            for (int i = 0; i < 4; ++i) {
                ovr[i] = labels[i] == k ? 1 : 0;
                col[i] = probs(i, k);
            }
            expect += auc_pair_counting(ovr, col);
        }
        expect /= 3.0;
        CHECK(roc_auc_macro_ovr(labels, probs).value == doctest::Approx(expect).epsilon(1e-15));
    }
    SUBCASE("absent class is an error") {
        Matrix probs(2, 3, 1.0 / 3.0);
        CHECK_THROWS_AS(roc_auc_macro_ovr({0, 1}, probs), SingleClassError);
    }
    SUBCASE("two classes delegate to the binary path") {
        Rng rng(5);
        const int n = 40;
        Matrix probs(n, 2);
        std::vector<int> labels(n);
        std::vector<double> col(n);
        for (int i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.uniform_int(0, 1));
            probs(i, 1) = rng.uniform();
            probs(i, 0) = 1.0 - probs(i, 1);
            col[i] = probs(i, 1);
        }
        labels[0] = 0;
        labels[1] = 1;
        CHECK(roc_auc_macro_ovr(labels, probs).value == roc_auc_binary(labels, col).value);
    }
}

TEST_CASE("loss is one minus score") {
    Matrix probs(2, 2, 0.0);
    probs(0, 0) = 1.0;
    probs(1, 1) = 1.0;
    CHECK(loss_of(MetricKind::BalancedAccuracy, {0, 1}, probs) == 0.0);
    CHECK(loss_of(MetricKind::RocAuc, {0, 1}, probs) == 0.0);
    Matrix uniform(4, 3, 1.0 / 3.0);
    CHECK(loss_of(MetricKind::RocAuc, {0, 1, 2, 0}, uniform) == 0.5);
    CHECK(loss_of(MetricKind::BalancedAccuracy, {0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1}) ==
          0.25);
}

} // TEST_SUITE
