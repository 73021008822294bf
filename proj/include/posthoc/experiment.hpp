#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "posthoc/stats.hpp"
#include "posthoc/types.hpp"

namespace posthoc {

inline const std::vector<std::string> kAllMethods = {
    "single-best", "ges", "cmaes", "cmaes-softmax", "cmaes-implicit", "cmaes-explicit",
    "stacking"};
inline const std::vector<std::string> kAllMetrics = {"balanced-accuracy", "roc-auc"};

MetricKind metric_from_name(const std::string& name);
std::string metric_name(MetricKind metric);

struct RunConfig {
    std::string data_root;
    std::vector<std::string> methods = kAllMethods;
    std::vector<std::string> metrics = kAllMetrics;
    int n_iters = 50;
    int n_hyp = 50;
    double sigma0 = 0.2;
    std::optional<std::uint64_t> seed;  // required when any cmaes-* method runs
    int workers = 1;
    std::string output_dir;
    bool verbose = false;

    void validate() const;
    static RunConfig from_json_file(const std::string& path);
    std::string to_json() const;
};

struct MethodRunRecord {
    std::string dataset;
    std::string task_type;  // "binary" | "multiclass"
    int fold = 0;
    std::string method;
    std::string metric;
    std::string split;  // "val" | "test"
    double score = 0.0;
    std::size_t loss_evals = 0;
    int ensemble_size = 0;
    double wall_time_ms = 0.0;
    std::string weight_vector;  // ';'-joined, shortest round-trip doubles
};

// One fitted (dataset, fold, metric, method); kept in memory for invariant
// checks that need more than the serialized records.
struct FitSummary {
    std::string dataset;
    int fold = 0;
    std::string method;
    std::string metric;
    double best_loss = 0.0;
    double x0_loss = 0.0;  // NaN for methods without a one-hot init
    std::size_t loss_evals = 0;
    int pool_size = 0;
};

struct GroupKey {
    std::string metric;
    std::string task_type;
    bool operator<(const GroupKey& o) const {
        return metric != o.metric ? metric < o.metric : task_type < o.task_type;
    }
    std::string name() const { return metric + "_" + task_type; }
};

struct RunResult {
    std::vector<MethodRunRecord> records;
    std::vector<FitSummary> fits;
    std::map<GroupKey, ScoreTable> val_tables;
    std::map<GroupKey, ScoreTable> test_tables;
    std::vector<std::string> warnings;  // per-cell failures, dropped datasets
    bool partial_failures = false;
};

// Fits every (dataset, fold, metric, method) work item on validation data,
// scores on validation and test, fold-averages into per-dataset scores and
// groups score tables by (metric, task kind). Work items run on a bounded
// worker pool; outputs are independent of the worker count.
RunResult run_experiment(const RunConfig& config);

// Single work item, exposed for the `fit` CLI subcommand.
struct SingleFit {
    MethodRunRecord val_record;
    MethodRunRecord test_record;
    FitSummary summary;
};
SingleFit fit_one(const FoldData& fold, const std::string& task_type, const std::string& method,
                  const std::string& metric, const RunConfig& config);

} // namespace posthoc
