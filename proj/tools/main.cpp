// posthoc: ensemble weight search over base-model prediction matrices and the
// comparison statistics that go with it.
//
// Subcommands:
//   gen     write a synthetic benchmark in the on-disk format
//   fit     fit one (dataset, fold, method, metric) and print JSON
//   run     full experiment from a JSON config; writes reports
//   report  re-emit reports from an existing records.csv

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "posthoc/dataset_io.hpp"
#include "posthoc/experiment.hpp"
#include "posthoc/report.hpp"
#include "posthoc/synthetic.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_gen(const posthoc::GenSpec& spec, const std::string& out_dir, bool verbose) {
    const auto names = posthoc::generate_synthetic(spec, out_dir);
    if (verbose)
        for (const auto& n : names) std::cerr << "generated " << out_dir << "/" << n << "\n";
    std::cout << "generated " << names.size() << " datasets under " << out_dir << "\n";
    return 0;
}

int run_fit(const std::string& data_root, const std::string& dataset, int fold,
            const std::string& method, const std::string& metric,
            std::optional<std::uint64_t> seed, int n_iters, int n_hyp, double sigma0) {
    posthoc::RunConfig config;
    config.data_root = data_root;
    config.methods = {method};
    config.metrics = {metric};
    config.n_iters = n_iters;
    config.n_hyp = n_hyp;
    config.sigma0 = sigma0;
    config.seed = seed;
    config.validate();

    const fs::path dir = fs::path(data_root) / dataset;
    const posthoc::DatasetMeta meta = posthoc::read_meta(dir);
    const auto folds = posthoc::ingest_dataset(dir);
    if (fold < 0 || fold >= static_cast<int>(folds.size()))
        throw posthoc::ConfigError("fold " + std::to_string(fold) + " outside [0, " +
                                   std::to_string(folds.size()) + ")");

    const posthoc::SingleFit fit =
        posthoc::fit_one(folds[fold], meta.task_type, method, metric, config);

    json j;
    j["dataset"] = dataset;
    j["fold"] = fold;
    j["method"] = method;
    j["metric"] = metric;
    j["val_score"] = fit.val_record.score;
    j["test_score"] = fit.test_record.score;
    j["loss_evals"] = fit.summary.loss_evals;
    j["ensemble_size"] = fit.val_record.ensemble_size;
    json weights = json::array();
    {
        std::stringstream ss(fit.val_record.weight_vector);
        std::string tok;
        while (std::getline(ss, tok, ';'))
            weights.push_back(posthoc::parse_double(tok, "weight"));
    }
    j["weights"] = weights;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_experiment_cmd(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
                       std::optional<int> workers_flag, bool verbose) {
    posthoc::RunConfig config = posthoc::RunConfig::from_json_file(config_path);
    if (seed_flag.has_value()) config.seed = seed_flag;
    if (workers_flag.has_value()) config.workers = *workers_flag;
    if (verbose) config.verbose = true;
    if (config.output_dir.empty())
        throw posthoc::ConfigError("config: output_dir is required for `run`");
    config.validate();

    const posthoc::RunResult result = posthoc::run_experiment(config);
    posthoc::emit_report(result, config, config.output_dir);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (config.verbose)
        std::cerr << result.records.size() << " records, " << result.val_tables.size()
                  << " score-table groups\n";
    std::cout << "reports written to " << config.output_dir << "\n";
    return result.partial_failures ? 2 : 0;
}

int run_report(const std::string& records_path, const std::string& out_dir) {
    auto records = posthoc::read_records(records_path);
    posthoc::RunResult result = posthoc::result_from_records(std::move(records));
    posthoc::RunConfig config;  // echo of what is known from the records
    config.data_root = "(records: " + records_path + ")";
    config.output_dir = out_dir;
    posthoc::emit_report(result, config, out_dir);
    std::cout << "reports written to " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"post hoc ensembling workbench"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool verbose = false;
    app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--workers", workers, "worker thread count");
    app.add_flag("--verbose", verbose, "chatty stderr output");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic benchmark");
    posthoc::GenSpec spec;
    std::string gen_out = "data";
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--datasets", spec.n_datasets, "number of datasets");
    gen->add_option("--folds", spec.n_folds, "folds per dataset");
    gen->add_option("--m-min", spec.m_min, "min pool size");
    gen->add_option("--m-max", spec.m_max, "max pool size");
    gen->add_option("--c-min", spec.c_min, "min class count");
    gen->add_option("--c-max", spec.c_max, "max class count");
    gen->add_option("--n-val-min", spec.n_val_min, "min validation instances");
    gen->add_option("--n-val-max", spec.n_val_max, "max validation instances");
    gen->add_option("--n-test-min", spec.n_test_min, "min test instances");
    gen->add_option("--n-test-max", spec.n_test_max, "max test instances");
    gen->add_option("--signal-min", spec.signal_min, "min model signal");
    gen->add_option("--signal-max", spec.signal_max, "max model signal");
    gen->add_option("--shared-noise-min", spec.shared_noise_min, "min shared noise magnitude");
    gen->add_option("--shared-noise-max", spec.shared_noise_max, "max shared noise magnitude");
    gen->add_option("--private-noise-min", spec.private_noise_min, "min private noise");
    gen->add_option("--private-noise-max", spec.private_noise_max, "max private noise");
    gen->add_flag("--complementary-pair", spec.complementary_pair,
                  "plant a strong anticorrelated model pair");

    // fit
    auto* fit = app.add_subcommand("fit", "fit one dataset/fold/method");
    std::string fit_data, fit_dataset, fit_method, fit_metric = "roc-auc";
    int fit_fold = 0, fit_n_iters = 50, fit_n_hyp = 50;
    double fit_sigma0 = 0.2;
    fit->add_option("--data", fit_data, "data root")->required();
    fit->add_option("--dataset", fit_dataset, "dataset name")->required();
    fit->add_option("--fold", fit_fold, "fold id");
    fit->add_option("--method", fit_method, "method name")->required();
    fit->add_option("--metric", fit_metric, "balanced-accuracy | roc-auc");
    fit->add_option("--n-iters", fit_n_iters, "iteration budget factor");
    fit->add_option("--n-hyp", fit_n_hyp, "hypothetical iterations for normalization");
    fit->add_option("--sigma0", fit_sigma0, "initial step size");

    // run
    auto* run = app.add_subcommand("run", "run a full experiment");
    std::string run_config;
    run->add_option("--config", run_config, "JSON config file")->required();

    // report
    auto* report = app.add_subcommand("report", "re-emit reports from records.csv");
    std::string report_from, report_out = "reports";
    report->add_option("--from", report_from, "records.csv path")->required();
    report->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (seed.has_value()) spec.seed = *seed;
            return run_gen(spec, gen_out, verbose);
        }
        if (fit->parsed())
            return run_fit(fit_data, fit_dataset, fit_fold, fit_method, fit_metric, seed,
                           fit_n_iters, fit_n_hyp, fit_sigma0);
        if (run->parsed()) return run_experiment_cmd(run_config, seed, workers, verbose);
        if (report->parsed()) return run_report(report_from, report_out);
    } catch (const posthoc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
