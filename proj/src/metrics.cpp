#include "posthoc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "posthoc/aggregate.hpp"

namespace posthoc {

Score balanced_accuracy(const std::vector<int>& labels, const std::vector<int>& predicted) {
    if (labels.empty()) throw EmptyInput("balanced_accuracy: empty label vector");
    if (labels.size() != predicted.size())
        throw LengthMismatch("balanced_accuracy: " + std::to_string(labels.size()) +
                             " labels vs " + std::to_string(predicted.size()) + " predictions");
    const int c = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::size_t> total(c, 0), correct(c, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++total[labels[i]];
        if (predicted[i] == labels[i]) ++correct[labels[i]];
    }
    double recall_sum = 0.0;
    int present = 0;
    for (int k = 0; k < c; ++k) {
        if (total[k] == 0) continue;
        recall_sum += static_cast<double>(correct[k]) / static_cast<double>(total[k]);
        ++present;
    }
    return {recall_sum / present, MetricKind::BalancedAccuracy};
}

Score roc_auc_binary(const std::vector<int>& labels, const std::vector<double>& scores) {
    if (labels.empty()) throw EmptyInput("roc_auc_binary: empty input");
    if (labels.size() != scores.size())
        throw LengthMismatch("roc_auc_binary: " + std::to_string(labels.size()) + " labels vs " +
                             std::to_string(scores.size()) + " scores");
    const std::size_t n = labels.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y == 1);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw SingleClassError("roc_auc_binary: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tie groups; sum the positive ranks
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] == 1) rank_sum_pos += midrank;
        i = j + 1;
    }
    const double auc =
        (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
        (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    return {auc, MetricKind::RocAuc};
}

Score roc_auc_macro_ovr(const std::vector<int>& labels, const Matrix& probs) {
    if (labels.empty()) throw EmptyInput("roc_auc_macro_ovr: empty input");
    if (labels.size() != probs.rows)
        throw LengthMismatch("roc_auc_macro_ovr: label/row count mismatch");
    const int c = static_cast<int>(probs.cols);
    if (c < 2) throw Error("roc_auc_macro_ovr: need at least 2 classes");

    std::vector<std::size_t> counts(c, 0);
    for (int y : labels) {
        if (y < 0 || y >= c) throw LabelRangeError("roc_auc_macro_ovr: label out of range");
        ++counts[y];
    }
    for (int k = 0; k < c; ++k)
        if (counts[k] == 0)
            throw SingleClassError("roc_auc_macro_ovr: class " + std::to_string(k) +
                                   " absent from labels");

    std::vector<double> col(labels.size());
    if (c == 2) {
        for (std::size_t i = 0; i < labels.size(); ++i) col[i] = probs(i, 1);
        return {roc_auc_binary(labels, col).value, MetricKind::RocAuc};
    }
    std::vector<int> ovr(labels.size());
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ovr[i] = labels[i] == k ? 1 : 0;
            col[i] = probs(i, k);
        }
        sum += roc_auc_binary(ovr, col).value;
    }
    return {sum / c, MetricKind::RocAuc};
}

double loss_of(MetricKind metric, const std::vector<int>& labels, const Matrix& agg_probs) {
    if (metric == MetricKind::RocAuc) return 1.0 - roc_auc_macro_ovr(labels, agg_probs).value;
    return 1.0 - balanced_accuracy(labels, predict_labels(agg_probs)).value;
}

double loss_of(MetricKind metric, const std::vector<int>& labels,
               const std::vector<int>& predicted) {
    if (metric != MetricKind::BalancedAccuracy)
        throw Error("loss_of: ROC AUC needs probabilities, not labels");
    return 1.0 - balanced_accuracy(labels, predicted).value;
}

} // namespace posthoc
