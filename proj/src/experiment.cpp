#include "posthoc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <thread>

#include <json.hpp>

#include "posthoc/aggregate.hpp"
#include "posthoc/cmaes.hpp"
#include "posthoc/dataset_io.hpp"
#include "posthoc/ges.hpp"
#include "posthoc/metrics.hpp"
#include "posthoc/rng.hpp"
#include "posthoc/stacking.hpp"

using nlohmann::json;

namespace posthoc {

MetricKind metric_from_name(const std::string& name) {
    if (name == "balanced-accuracy") return MetricKind::BalancedAccuracy;
    if (name == "roc-auc") return MetricKind::RocAuc;
    throw ConfigError("unknown metric '" + name + "'");
}

std::string metric_name(MetricKind metric) {
    return metric == MetricKind::BalancedAccuracy ? "balanced-accuracy" : "roc-auc";
}

void RunConfig::validate() const {
    if (data_root.empty()) throw ConfigError("config: data_root is required");
    if (methods.empty()) throw ConfigError("config: methods must not be empty");
    if (metrics.empty()) throw ConfigError("config: metrics must not be empty");
    for (const auto& m : methods)
        if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end())
            throw ConfigError("config: unknown method '" + m + "'");
    for (const auto& m : metrics) metric_from_name(m);
    {
        std::set<std::string> uniq(methods.begin(), methods.end());
        if (uniq.size() != methods.size()) throw ConfigError("config: duplicate method");
    }
    const bool any_cmaes = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
        return m.rfind("cmaes", 0) == 0;
    });
    if (any_cmaes && !seed.has_value())
        throw ConfigError("config: seed is required for cmaes-* methods");
    if (n_iters < 1) throw ConfigError("config: n_iters must be positive");
    if (n_hyp < 1) throw ConfigError("config: n_hyp must be positive");
    if (sigma0 <= 0.0) throw ConfigError("config: sigma0 must be positive");
    if (workers < 1) throw ConfigError("config: workers must be positive");
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    RunConfig cfg;
    try {
        cfg.data_root = j.at("data_root").get<std::string>();
        if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
        if (j.contains("metrics")) cfg.metrics = j["metrics"].get<std::vector<std::string>>();
        if (j.contains("n_iters")) cfg.n_iters = j["n_iters"].get<int>();
        if (j.contains("n_hyp")) cfg.n_hyp = j["n_hyp"].get<int>();
        if (j.contains("sigma0")) cfg.sigma0 = j["sigma0"].get<double>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
        if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("verbose")) cfg.verbose = j["verbose"].get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

std::string RunConfig::to_json() const {
    json j;
    j["data_root"] = data_root;
    j["methods"] = methods;
    j["metrics"] = metrics;
    j["n_iters"] = n_iters;
    j["n_hyp"] = n_hyp;
    j["sigma0"] = sigma0;
    if (seed.has_value()) j["seed"] = *seed;
    j["workers"] = workers;
    j["output_dir"] = output_dir;
    j["verbose"] = verbose;
    return j.dump(2);
}

namespace {

std::string serialize_weights(const WeightVector& w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i > 0) out += ';';
        out += format_double(w[i]);
    }
    return out;
}

struct FittedMethod {
    WeightVector weights;          // empty for stacking
    std::optional<StackerModel> stacker;
    EvalMode mode = EvalMode::Normalized;
    std::size_t loss_evals = 0;
    int size = 0;
    double best_loss = std::numeric_limits<double>::quiet_NaN();
    double x0_loss = std::numeric_limits<double>::quiet_NaN();
};

double score_on(const FittedMethod& fm, const PredictionSet& ps, MetricKind metric) {
    if (fm.stacker.has_value()) {
        const Matrix probs = stacker_predict(*fm.stacker, ps);
        if (metric == MetricKind::BalancedAccuracy)
            return balanced_accuracy(ps.labels, predict_labels(probs)).value;
        return roc_auc_macro_ovr(ps.labels, probs).value;
    }
    return 1.0 - evaluate_weights(ps, fm.weights, metric, fm.mode);
}

FittedMethod fit_method(const FoldData& fold, const std::string& method, MetricKind metric,
                        const RunConfig& config, std::uint64_t item_seed) {
    const PredictionSet& val = fold.val;
    FittedMethod fm;
    if (method == "single-best") {
        int best = 0;
        double best_loss = std::numeric_limits<double>::infinity();
        for (int b = 0; b < val.n_models; ++b) {
            WeightVector one_hot(val.n_models, 0.0);
            one_hot[b] = 1.0;
            const double l = evaluate_weights(val, one_hot, metric, EvalMode::Normalized);
            if (l < best_loss) {
                best_loss = l;
                best = b;
            }
        }
        fm.weights.assign(val.n_models, 0.0);
        fm.weights[best] = 1.0;
        fm.mode = EvalMode::Normalized;
        fm.loss_evals = static_cast<std::size_t>(val.n_models);
        fm.size = 1;
        fm.best_loss = best_loss;
    } else if (method == "ges") {
        const GesResult res = ges_fit(val, metric, config.n_iters);
        fm.weights = res.weights;
        fm.mode = EvalMode::Normalized;
        fm.loss_evals = res.eval_count;
        fm.size = ensemble_size(res.weights, 0.0);
        fm.best_loss = res.best_loss;
    } else if (method == "stacking") {
        require_pool_size(val, 2, "stacking");
        const std::size_t budget =
            static_cast<std::size_t>(val.n_models) * static_cast<std::size_t>(config.n_iters);
        fm.stacker = stacker_fit(val, budget);
        fm.loss_evals = static_cast<std::size_t>(fm.stacker->epochs_used);
        fm.size = val.n_models;
        fm.best_loss = fm.stacker->final_loss;
    } else {
        Normalizer norm = Normalizer::None;
        double size_tol = 1e-12;
        if (method == "cmaes-softmax") {
            norm = Normalizer::Softmax;
        } else if (method == "cmaes-implicit") {
            norm = Normalizer::ImplicitGes;
            size_tol = 0.0;
        } else if (method == "cmaes-explicit") {
            norm = Normalizer::ExplicitGes;
            size_tol = 0.0;
        } else if (method != "cmaes") {
            throw ConfigError("unknown method '" + method + "'");
        }
        const EnsembleFitResult res = cmaes_fit_ensemble(val, metric, norm, item_seed,
                                                         config.n_iters, config.sigma0,
                                                         config.n_hyp);
        fm.weights = res.weights;
        fm.mode = norm == Normalizer::None ? EvalMode::RawCmaes : EvalMode::Normalized;
        fm.loss_evals = res.eval_count;
        fm.size = ensemble_size(res.weights, size_tol);
        fm.best_loss = res.best_loss;
        fm.x0_loss = res.x0_loss;
    }
    return fm;
}

} // namespace

SingleFit fit_one(const FoldData& fold, const std::string& task_type, const std::string& method,
                  const std::string& metric, const RunConfig& config) {
    const MetricKind mk = metric_from_name(metric);
    const std::uint64_t item_seed =
        stable_hash64(stable_hash64(stable_hash64(stable_hash64(config.seed.value_or(0) + 1,
                                                                fold.dataset_name),
                                                  static_cast<std::uint64_t>(fold.fold_id)),
                                    method),
                      metric);

    const auto t0 = std::chrono::steady_clock::now();
    const FittedMethod fm = fit_method(fold, method, mk, config, item_seed);
    const double val_score = score_on(fm, fold.val, mk);
    const double test_score = score_on(fm, fold.test, mk);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    const std::string wv = fm.stacker.has_value() ? std::string() : serialize_weights(fm.weights);
    SingleFit out;
    out.val_record = {fold.dataset_name, task_type, fold.fold_id, method, metric,
                      "val",             val_score, fm.loss_evals, fm.size, ms, wv};
    out.test_record = {fold.dataset_name, task_type,  fold.fold_id,  method, metric,
                       "test",            test_score, fm.loss_evals, fm.size, ms, wv};
    out.summary = {fold.dataset_name, fold.fold_id, method,        metric,
                   fm.best_loss,      fm.x0_loss,   fm.loss_evals, fold.val.n_models};
    return out;
}

RunResult run_experiment(const RunConfig& config) {
    config.validate();

    struct DatasetEntry {
        std::string name;
        std::string task_type;
        std::vector<FoldData> folds;
    };
    std::vector<DatasetEntry> datasets;
    for (const std::string& name : list_datasets(config.data_root)) {
        DatasetEntry entry;
        entry.name = name;
        const auto dir = std::filesystem::path(config.data_root) / name;
        entry.task_type = read_meta(dir).task_type;
        entry.folds = ingest_dataset(dir);
        datasets.push_back(std::move(entry));
    }
    if (datasets.empty()) throw ConfigError("no datasets under " + config.data_root);

    struct WorkItem {
        const DatasetEntry* dataset;
        const FoldData* fold;
        const std::string* method;
        const std::string* metric;
    };
    std::vector<WorkItem> items;
    for (const auto& ds : datasets)
        for (const auto& fold : ds.folds)
            for (const auto& metric : config.metrics)
                for (const auto& method : config.methods)
                    items.push_back({&ds, &fold, &method, &metric});

    struct ItemResult {
        SingleFit fit;
        bool failed = false;
        std::string error;
    };
    std::vector<ItemResult> results(items.size());
    std::atomic<std::size_t> next{0};
    const int n_workers = std::max(1, std::min<int>(config.workers,
                                                    static_cast<int>(items.size())));
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= items.size()) return;
            const WorkItem& it = items[idx];
            try {
                results[idx].fit = fit_one(*it.fold, it.dataset->task_type, *it.method,
                                           *it.metric, config);
            } catch (const std::exception& e) {
                results[idx].failed = true;
                results[idx].error = e.what();
            }
        }
    };
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    RunResult run;
    // datasets with any failed cell are dropped from the tables of the
    // affected metric, with a logged reason
    std::map<std::string, std::set<std::string>> dropped;  // metric -> datasets
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!results[i].failed) continue;
        run.partial_failures = true;
        const WorkItem& it = items[i];
        dropped[*it.metric].insert(it.dataset->name);
        run.warnings.push_back("dropped " + it.dataset->name + " for " + *it.metric + ": " +
                               *it.method + " fold " + std::to_string(it.fold->fold_id) +
                               " failed: " + results[i].error);
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (results[i].failed) continue;
        run.records.push_back(results[i].fit.val_record);
        run.records.push_back(results[i].fit.test_record);
        run.fits.push_back(results[i].fit.summary);
    }

    // fold-averaged per-dataset scores -> grouped score tables
    for (const auto& metric : config.metrics) {
        std::map<std::string, std::vector<const DatasetEntry*>> by_task;
        for (const auto& ds : datasets) {
            if (dropped.count(metric) && dropped[metric].count(ds.name)) continue;
            by_task[ds.task_type].push_back(&ds);
        }
        for (const auto& [task_type, group] : by_task) {
            const GroupKey key{metric, task_type};
            ScoreTable val_table, test_table;
            val_table.split = Split::Validation;
            test_table.split = Split::Test;
            val_table.methods = test_table.methods = config.methods;
            for (const auto* ds : group)
                val_table.datasets.push_back(ds->name);
            test_table.datasets = val_table.datasets;
            val_table.scores = Matrix(group.size(), config.methods.size(), 0.0);
            test_table.scores = val_table.scores;

            std::map<std::string, std::size_t> dataset_row, method_col;
            for (std::size_t r = 0; r < val_table.datasets.size(); ++r)
                dataset_row[val_table.datasets[r]] = r;
            for (std::size_t c = 0; c < config.methods.size(); ++c)
                method_col[config.methods[c]] = c;
            Matrix fold_counts(group.size(), config.methods.size(), 0.0);
            for (const auto& rec : run.records) {
                if (rec.metric != metric) continue;
                auto row_it = dataset_row.find(rec.dataset);
                if (row_it == dataset_row.end()) continue;
                const std::size_t r = row_it->second;
                const std::size_t c = method_col.at(rec.method);
                if (rec.split == "val")
                    val_table.scores(r, c) += rec.score;
                else
                    test_table.scores(r, c) += rec.score;
                if (rec.split == "val") fold_counts(r, c) += 1.0;
            }
            for (std::size_t r = 0; r < group.size(); ++r)
                for (std::size_t c = 0; c < config.methods.size(); ++c) {
                    val_table.scores(r, c) /= fold_counts(r, c);
                    test_table.scores(r, c) /= fold_counts(r, c);
                }
            run.val_tables[key] = std::move(val_table);
            run.test_tables[key] = std::move(test_table);
        }
    }
    return run;
}

} // namespace posthoc
