#pragma once

#include <string>
#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// Fold-averaged scores, one row per dataset, one column per method.
struct ScoreTable {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    Matrix scores;  // [n_datasets x n_methods], no missing cells
    Split split = Split::Validation;
};

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool two_method_warning = false;  // k == 2: statistic reported, test underpowered
};

struct RankChangeRow {
    std::string method;
    double mean_rank_val = 0.0;
    double mean_rank_test = 0.0;
    double abs_rank_val = 0.0;
    double abs_rank_test = 0.0;
};

struct RankReport {
    std::vector<std::string> methods;
    std::vector<double> mean_ranks_val;
    std::vector<double> mean_ranks_test;
    FriedmanResult friedman_val;
    FriedmanResult friedman_test_split;
    double cd = 0.0;  // Nemenyi critical difference at alpha = 0.05
    std::vector<std::vector<bool>> pairwise_significant;  // on test mean ranks
    std::vector<double> absolute_ranks_val;
    std::vector<double> absolute_ranks_test;
};

// Per dataset, methods ranked by score descending (rank 1 = best), ties
// averaged; the output is the columnwise mean. Throws MissingCell on NaN.
std::vector<double> mean_ranks(const ScoreTable& table);

// Tie-corrected Friedman chi-square over tie-averaged ranks; p-value from the
// chi-square distribution with k-1 degrees of freedom. A fully tied table
// yields statistic 0, p 1.
FriedmanResult friedman_test(const ScoreTable& table);

// CD = q_alpha(k) * sqrt(k (k+1) / (6 n)); the embedded q table covers
// alpha = 0.05, k = 2..10.
double nemenyi_cd(int k, int n, double alpha = 0.05);

// Appendix-style per-dataset score rescaling: baseline at -1, best method at
// 0; when the best method equals the baseline, methods at the baseline score
// map to -1 and anything worse to -10.
double normalized_improvement(double score, double baseline_score, double best_score);

// Mean ranks per split plus tie-averaged absolute ranks of those mean ranks.
std::vector<RankChangeRow> rank_change_table(const ScoreTable& val_table,
                                             const ScoreTable& test_table);

// Number of non-zero weighted base models.
int ensemble_size(const WeightVector& w, double tol = 0.0);

RankReport make_rank_report(const ScoreTable& val_table, const ScoreTable& test_table,
                            double alpha = 0.05);

// Tie-averaged ranks of `values` ascending (rank 1 = smallest).
std::vector<double> tie_avg_ranks_ascending(const std::vector<double>& values);

// Regularized upper incomplete gamma Q(a, x); survival function of the
// chi-square distribution via Q(k/2, x/2).
double gamma_q(double a, double x);

} // namespace posthoc
