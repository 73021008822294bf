#include "posthoc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace posthoc {

std::vector<double> tie_avg_ranks_ascending(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

void check_table(const ScoreTable& table) {
    if (table.datasets.empty() || table.methods.empty())
        throw DegenerateTable("score table must not be empty");
    if (table.scores.rows != table.datasets.size() || table.scores.cols != table.methods.size())
        throw DegenerateTable("score table shape does not match its labels");
    for (double v : table.scores.data)
        if (std::isnan(v)) throw MissingCell("score table contains a missing cell");
}

// rank 1 = best (highest score), ties averaged
std::vector<double> row_ranks_descending(const ScoreTable& table, std::size_t row) {
    std::vector<double> negated(table.methods.size());
    for (std::size_t j = 0; j < negated.size(); ++j) negated[j] = -table.scores(row, j);
    return tie_avg_ranks_ascending(negated);
}

} // namespace

std::vector<double> mean_ranks(const ScoreTable& table) {
    check_table(table);
    const std::size_t k = table.methods.size();
    std::vector<double> sums(k, 0.0);
    for (std::size_t i = 0; i < table.datasets.size(); ++i) {
        const std::vector<double> r = row_ranks_descending(table, i);
        for (std::size_t j = 0; j < k; ++j) sums[j] += r[j];
    }
    for (double& v : sums) v /= static_cast<double>(table.datasets.size());
    return sums;
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw Error("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // series for P(a,x), return 1 - P
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // continued fraction for Q(a,x), modified Lentz
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

FriedmanResult friedman_test(const ScoreTable& table) {
    check_table(table);
    const std::size_t n = table.datasets.size();
    const std::size_t k = table.methods.size();
    if (n < 2) throw DegenerateTable("friedman_test: need at least 2 datasets");
    if (k < 2) throw DegenerateTable("friedman_test: need at least 2 methods");

    FriedmanResult res;
    res.two_method_warning = (k == 2);

    std::vector<double> rank_sums(k, 0.0);
    double tie_term = 0.0;  // sum over rows of sum(t^3 - t) per tie group
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> r = row_ranks_descending(table, i);
        for (std::size_t j = 0; j < k; ++j) rank_sums[j] += r[j];
        std::vector<double> sorted(table.scores.row(i), table.scores.row(i) + k);
        std::sort(sorted.begin(), sorted.end());
        std::size_t t = 0;
        while (t < k) {
            std::size_t u = t;
            while (u + 1 < k && sorted[u + 1] == sorted[t]) ++u;
            const double g = static_cast<double>(u - t + 1);
            tie_term += g * g * g - g;
            t = u + 1;
        }
    }

    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    double stat = 0.0;
    for (double rs : rank_sums) stat += rs * rs;
    stat = 12.0 / (dn * dk * (dk + 1.0)) * stat - 3.0 * dn * (dk + 1.0);
    const double correction = 1.0 - tie_term / (dn * dk * (dk * dk - 1.0));
    if (correction <= 0.0) {
        // every row fully tied: no information, by convention not significant
        res.statistic = 0.0;
        res.p_value = 1.0;
        return res;
    }
    stat /= correction;
    res.statistic = stat;
    res.p_value = gamma_q((dk - 1.0) / 2.0, std::max(stat, 0.0) / 2.0);
    return res;
}

double nemenyi_cd(int k, int n, double alpha) {
    // studentized range q(alpha) / sqrt(2) for infinite df, alpha = 0.05
    static const double q_05[] = {1.960, 2.343, 2.569, 2.728, 2.850,
                                  2.949, 3.031, 3.102, 3.164};
    if (std::abs(alpha - 0.05) > 1e-12)
        throw KOutOfRange("nemenyi_cd: only alpha = 0.05 is tabulated");
    if (k < 2 || k > 10)
        throw KOutOfRange("nemenyi_cd: k = " + std::to_string(k) + " outside [2, 10]");
    if (n < 2) throw DegenerateTable("nemenyi_cd: need at least 2 datasets");
    const double q = q_05[k - 2];
    return q * std::sqrt(static_cast<double>(k) * (k + 1.0) / (6.0 * static_cast<double>(n)));
}

double normalized_improvement(double score, double baseline_score, double best_score) {
    if (best_score == baseline_score) return score >= baseline_score ? -1.0 : -10.0;
    return (score - baseline_score) / (best_score - baseline_score) - 1.0;
}

std::vector<RankChangeRow> rank_change_table(const ScoreTable& val_table,
                                             const ScoreTable& test_table) {
    if (val_table.datasets != test_table.datasets || val_table.methods != test_table.methods)
        throw TableMismatch("rank_change_table: tables disagree on datasets or methods");
    const std::vector<double> mr_val = mean_ranks(val_table);
    const std::vector<double> mr_test = mean_ranks(test_table);
    const std::vector<double> abs_val = tie_avg_ranks_ascending(mr_val);
    const std::vector<double> abs_test = tie_avg_ranks_ascending(mr_test);
    std::vector<RankChangeRow> rows(val_table.methods.size());
    for (std::size_t j = 0; j < rows.size(); ++j)
        rows[j] = {val_table.methods[j], mr_val[j], mr_test[j], abs_val[j], abs_test[j]};
    return rows;
}

int ensemble_size(const WeightVector& w, double tol) {
    int count = 0;
    for (double v : w)
        if (std::abs(v) > tol) ++count;
    return count;
}

RankReport make_rank_report(const ScoreTable& val_table, const ScoreTable& test_table,
                            double alpha) {
    if (val_table.datasets != test_table.datasets || val_table.methods != test_table.methods)
        throw TableMismatch("make_rank_report: tables disagree on datasets or methods");
    RankReport rep;
    rep.methods = test_table.methods;
    rep.mean_ranks_val = mean_ranks(val_table);
    rep.mean_ranks_test = mean_ranks(test_table);
    rep.friedman_val = friedman_test(val_table);
    rep.friedman_test_split = friedman_test(test_table);
    rep.absolute_ranks_val = tie_avg_ranks_ascending(rep.mean_ranks_val);
    rep.absolute_ranks_test = tie_avg_ranks_ascending(rep.mean_ranks_test);
    const int k = static_cast<int>(test_table.methods.size());
    rep.cd = nemenyi_cd(k, static_cast<int>(test_table.datasets.size()), alpha);
    rep.pairwise_significant.assign(k, std::vector<bool>(k, false));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            rep.pairwise_significant[i][j] =
                i != j && std::abs(rep.mean_ranks_test[i] - rep.mean_ranks_test[j]) > rep.cd;
    return rep;
}

} // namespace posthoc
