#include "posthoc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "posthoc/dataset_io.hpp"
#include "posthoc/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace posthoc {

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

// fixed-precision decimal for human-facing report columns
std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

void write_records_csv(const fs::path& path, const std::vector<MethodRunRecord>& records) {
    auto out = open_out(path);
    out << "dataset,task_type,fold,method,metric,split,score,loss_evals,ensemble_size,"
           "wall_time_ms,weight_vector\n";
    for (const auto& r : records) {
        out << r.dataset << ',' << r.task_type << ',' << r.fold << ',' << r.method << ','
            << r.metric << ',' << r.split << ',' << format_double(r.score) << ','
            << r.loss_evals << ',' << r.ensemble_size << ',' << fixed(r.wall_time_ms, 3) << ','
            << r.weight_vector << '\n';
    }
}

void write_rank_report_csv(const fs::path& path,
                           const std::map<GroupKey, RankReport>& reports) {
    auto out = open_out(path);
    out << "group,split,method,mean_rank,friedman_statistic,friedman_p,cd,"
           "significantly_different_from\n";
    for (const auto& [key, rep] : reports) {
        for (int split = 0; split < 2; ++split) {
            const bool is_val = split == 0;
            const auto& ranks = is_val ? rep.mean_ranks_val : rep.mean_ranks_test;
            const auto& fr = is_val ? rep.friedman_val : rep.friedman_test_split;
            for (std::size_t j = 0; j < rep.methods.size(); ++j) {
                out << key.name() << ',' << (is_val ? "val" : "test") << ',' << rep.methods[j]
                    << ',' << fixed(ranks[j]) << ',' << fixed(fr.statistic) << ','
                    << format_double(fr.p_value) << ',' << fixed(rep.cd) << ',';
                if (!is_val) {  // pairwise flags are computed on test mean ranks
                    std::string sig;
                    for (std::size_t o = 0; o < rep.methods.size(); ++o)
                        if (rep.pairwise_significant[j][o]) {
                            if (!sig.empty()) sig += ';';
                            sig += rep.methods[o];
                        }
                    out << sig;
                }
                out << '\n';
            }
        }
    }
}

void write_rank_change_csv(const fs::path& path,
                           const std::map<GroupKey, std::vector<RankChangeRow>>& tables) {
    auto out = open_out(path);
    out << "group,method,mean_rank_val,mean_rank_test,abs_rank_val,abs_rank_test\n";
    for (const auto& [key, rows] : tables)
        for (const auto& r : rows)
            out << key.name() << ',' << r.method << ',' << fixed(r.mean_rank_val) << ','
                << fixed(r.mean_rank_test) << ',' << fixed(r.abs_rank_val) << ','
                << fixed(r.abs_rank_test) << '\n';
}

struct NormImpGroup {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    Matrix values;
    std::vector<int> outliers;  // per method, count of values < -10
};

void write_norm_improvement_csv(const fs::path& path,
                                const std::map<GroupKey, NormImpGroup>& groups) {
    auto out = open_out(path);
    out << "group,dataset,method,normalized_improvement\n";
    for (const auto& [key, g] : groups) {
        for (std::size_t i = 0; i < g.datasets.size(); ++i)
            for (std::size_t j = 0; j < g.methods.size(); ++j)
                out << key.name() << ',' << g.datasets[i] << ',' << g.methods[j] << ','
                    << format_double(g.values(i, j)) << '\n';
        for (std::size_t j = 0; j < g.methods.size(); ++j)
            out << key.name() << ",(outliers_below_-10)," << g.methods[j] << ','
                << g.outliers[j] << '\n';
    }
}

void write_ensemble_sizes_csv(const fs::path& path,
                              const std::vector<MethodRunRecord>& records) {
    // mean non-zero weighted base models per (metric, task type, method),
    // over all (dataset, fold) fits; val/test rows carry the same fit so
    // only val rows are counted
    std::map<std::string, std::pair<double, std::size_t>> acc;
    std::set<std::string> metrics, tasks, methods;
    for (const auto& r : records) {
        if (r.split != "val") continue;
        const std::string key = r.metric + ',' + r.task_type + ',' + r.method;
        acc[key].first += r.ensemble_size;
        acc[key].second += 1;
        metrics.insert(r.metric);
        tasks.insert(r.task_type);
        methods.insert(r.method);
    }
    auto out = open_out(path);
    out << "metric,task_type,method,mean_ensemble_size\n";
    for (const auto& metric : metrics)
        for (const auto& task : tasks)
            for (const auto& method : methods) {
                const auto it = acc.find(metric + ',' + task + ',' + method);
                if (it == acc.end()) continue;
                out << metric << ',' << task << ',' << method << ','
                    << fixed(it->second.first / it->second.second, 3) << '\n';
            }
}

// Minimal critical-difference diagram: one panel per group, a rank axis with
// one tick per method, and bars connecting method groups whose mean-rank
// spread is within the CD.
void write_cd_plot_svg(const fs::path& path, const std::map<GroupKey, RankReport>& reports) {
    const double width = 840.0;
    const double panel_h = 180.0;
    const double margin_x = 90.0;
    std::ostringstream body;
    double y_off = 20.0;
    for (const auto& [key, rep] : reports) {
        const int k = static_cast<int>(rep.methods.size());
        const double axis_y = y_off + 70.0;
        const double x0 = margin_x;
        const double x1 = width - margin_x;
        auto rank_x = [&](double rank) {
            return k == 1 ? x0 : x0 + (rank - 1.0) / (k - 1.0) * (x1 - x0);
        };

        body << "<text x=\"" << fixed(x0, 1) << "\" y=\"" << fixed(y_off + 14.0, 1)
             << "\" font-size=\"14\" font-family=\"sans-serif\">" << key.name()
             << " (test, CD=" << fixed(rep.cd, 3) << ")</text>\n";
        body << "<line x1=\"" << fixed(x0, 1) << "\" y1=\"" << fixed(axis_y, 1) << "\" x2=\""
             << fixed(x1, 1) << "\" y2=\"" << fixed(axis_y, 1)
             << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        for (int t = 1; t <= k; ++t) {
            const double x = rank_x(t);
            body << "<line x1=\"" << fixed(x, 1) << "\" y1=\"" << fixed(axis_y - 4.0, 1)
                 << "\" x2=\"" << fixed(x, 1) << "\" y2=\"" << fixed(axis_y + 4.0, 1)
                 << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
            body << "<text x=\"" << fixed(x, 1) << "\" y=\"" << fixed(axis_y - 8.0, 1)
                 << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << t
                 << "</text>\n";
        }

        std::vector<std::size_t> order(rep.methods.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (rep.mean_ranks_test[a] != rep.mean_ranks_test[b])
                return rep.mean_ranks_test[a] < rep.mean_ranks_test[b];
            return rep.methods[a] < rep.methods[b];
        });

        // method labels with connector lines, alternating above the axis rows
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const std::size_t j = order[pos];
            const double x = rank_x(rep.mean_ranks_test[j]);
            const double label_y = axis_y + 34.0 + 14.0 * static_cast<double>(pos % 4);
            body << "<line x1=\"" << fixed(x, 1) << "\" y1=\"" << fixed(axis_y, 1) << "\" x2=\""
                 << fixed(x, 1) << "\" y2=\"" << fixed(label_y - 10.0, 1)
                 << "\" stroke=\"gray\" stroke-width=\"0.5\"/>\n";
            body << "<text x=\"" << fixed(x, 1) << "\" y=\"" << fixed(label_y, 1)
                 << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
                 << rep.methods[j] << " (" << fixed(rep.mean_ranks_test[j], 2) << ")</text>\n";
        }

        // bars: maximal runs of rank-sorted methods whose spread is <= CD
        double bar_y = axis_y + 8.0;
        std::size_t last_end = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::size_t j = i;
            while (j + 1 < order.size() && rep.mean_ranks_test[order[j + 1]] -
                                                   rep.mean_ranks_test[order[i]] <=
                                               rep.cd)
                ++j;
            if (j > i && (i == 0 || j + 1 > last_end)) {
                const double bx0 = rank_x(rep.mean_ranks_test[order[i]]) - 2.0;
                const double bx1 = rank_x(rep.mean_ranks_test[order[j]]) + 2.0;
                body << "<line x1=\"" << fixed(bx0, 1) << "\" y1=\"" << fixed(bar_y, 1)
                     << "\" x2=\"" << fixed(bx1, 1) << "\" y2=\"" << fixed(bar_y, 1)
                     << "\" stroke=\"black\" stroke-width=\"3\"/>\n";
                bar_y += 5.0;
                last_end = j + 1;
            }
        }
        y_off += panel_h;
    }

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0)
        << "\" height=\"" << fixed(std::max(y_off, panel_h), 0) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
}

} // namespace

void emit_report(const RunResult& result, const RunConfig& config, const fs::path& output_dir) {
    fs::create_directories(output_dir);

    std::vector<MethodRunRecord> records = result.records;
    std::sort(records.begin(), records.end(),
              [](const MethodRunRecord& a, const MethodRunRecord& b) {
                  return std::tie(a.metric, a.dataset, a.fold, a.method, a.split) <
                         std::tie(b.metric, b.dataset, b.fold, b.method, b.split);
              });
    write_records_csv(output_dir / "records.csv", records);

    std::map<GroupKey, RankReport> rank_reports;
    std::map<GroupKey, std::vector<RankChangeRow>> rank_changes;
    std::map<GroupKey, NormImpGroup> norm_groups;
    for (const auto& [key, val_table] : result.val_tables) {
        const ScoreTable& test_table = result.test_tables.at(key);
        rank_reports[key] = make_rank_report(val_table, test_table);
        rank_changes[key] = rank_change_table(val_table, test_table);

        const auto base_it = std::find(test_table.methods.begin(), test_table.methods.end(),
                                       std::string("single-best"));
        if (base_it == test_table.methods.end()) continue;
        const std::size_t base_col = base_it - test_table.methods.begin();
        NormImpGroup g;
        g.datasets = test_table.datasets;
        g.methods = test_table.methods;
        g.values = Matrix(g.datasets.size(), g.methods.size());
        g.outliers.assign(g.methods.size(), 0);
        for (std::size_t i = 0; i < g.datasets.size(); ++i) {
            const double baseline = test_table.scores(i, base_col);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < g.methods.size(); ++j)
                best = std::max(best, test_table.scores(i, j));
            for (std::size_t j = 0; j < g.methods.size(); ++j) {
                const double v =
                    normalized_improvement(test_table.scores(i, j), baseline, best);
                g.values(i, j) = v;
                if (v < -10.0) ++g.outliers[j];
            }
        }
        norm_groups[key] = std::move(g);
    }

    write_rank_report_csv(output_dir / "rank_report.csv", rank_reports);
    write_rank_change_csv(output_dir / "rank_change.csv", rank_changes);
    write_norm_improvement_csv(output_dir / "normalized_improvement.csv", norm_groups);
    write_ensemble_sizes_csv(output_dir / "ensemble_sizes.csv", records);
    write_cd_plot_svg(output_dir / "cd_plot.svg", rank_reports);

    json manifest;
    manifest["config"] = json::parse(config.to_json());
    manifest["rng"] = Rng::algorithm_name;
    manifest["seed_scheme"] = "fnv1a64(seed+1, dataset, fold, method, metric)";
    manifest["version"] = "0.1.0";
    manifest["warnings"] = result.warnings;
    manifest["partial_failures"] = result.partial_failures;
    auto out = open_out(output_dir / "run_manifest.json");
    out << manifest.dump(2) << '\n';
}

std::vector<MethodRunRecord> read_records(const fs::path& records_csv) {
    std::ifstream in(records_csv, std::ios::binary);
    if (!in) throw FormatError("missing " + records_csv.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError(records_csv.string() + ": empty file");
    std::vector<MethodRunRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cur;
        while (std::getline(ss, cur, ',')) f.push_back(cur);
        const std::string where = records_csv.string() + ":" + std::to_string(line_no);
        if (f.size() < 10 || f.size() > 11)
            throw FormatError(where + ": expected 10-11 fields, got " + std::to_string(f.size()));
        MethodRunRecord r;
        r.dataset = f[0];
        r.task_type = f[1];
        r.fold = static_cast<int>(parse_double(f[2], where));
        r.method = f[3];
        r.metric = f[4];
        r.split = f[5];
        r.score = parse_double(f[6], where);
        r.loss_evals = static_cast<std::size_t>(parse_double(f[7], where));
        r.ensemble_size = static_cast<int>(parse_double(f[8], where));
        r.wall_time_ms = parse_double(f[9], where);
        if (f.size() == 11) r.weight_vector = f[10];
        records.push_back(std::move(r));
    }
    return records;
}

RunResult result_from_records(std::vector<MethodRunRecord> records) {
    RunResult run;
    run.records = std::move(records);

    std::vector<std::string> metrics, methods;
    for (const auto& name : kAllMetrics)
        if (std::any_of(run.records.begin(), run.records.end(),
                        [&](const MethodRunRecord& r) { return r.metric == name; }))
            metrics.push_back(name);
    for (const auto& name : kAllMethods)
        if (std::any_of(run.records.begin(), run.records.end(),
                        [&](const MethodRunRecord& r) { return r.method == name; }))
            methods.push_back(name);

    for (const auto& metric : metrics) {
        std::map<std::string, std::string> task_of;
        for (const auto& r : run.records)
            if (r.metric == metric) task_of[r.dataset] = r.task_type;
        std::map<std::string, std::vector<std::string>> by_task;
        for (const auto& [ds, task] : task_of) by_task[task].push_back(ds);
        for (auto& [task, ds_names] : by_task) {
            std::sort(ds_names.begin(), ds_names.end());
            const GroupKey key{metric, task};
            ScoreTable val_table, test_table;
            val_table.split = Split::Validation;
            test_table.split = Split::Test;
            val_table.methods = test_table.methods = methods;
            val_table.datasets = test_table.datasets = ds_names;
            val_table.scores = Matrix(ds_names.size(), methods.size(), 0.0);
            test_table.scores = val_table.scores;
            Matrix counts_val = val_table.scores, counts_test = val_table.scores;
            std::map<std::string, std::size_t> row, col;
            for (std::size_t i = 0; i < ds_names.size(); ++i) row[ds_names[i]] = i;
            for (std::size_t j = 0; j < methods.size(); ++j) col[methods[j]] = j;
            for (const auto& r : run.records) {
                if (r.metric != metric || !row.count(r.dataset)) continue;
                const std::size_t i = row[r.dataset];
                const std::size_t j = col.at(r.method);
                if (r.split == "val") {
                    val_table.scores(i, j) += r.score;
                    counts_val(i, j) += 1.0;
                } else {
                    test_table.scores(i, j) += r.score;
                    counts_test(i, j) += 1.0;
                }
            }
            for (std::size_t i = 0; i < ds_names.size(); ++i)
                for (std::size_t j = 0; j < methods.size(); ++j) {
                    val_table.scores(i, j) =
                        counts_val(i, j) > 0 ? val_table.scores(i, j) / counts_val(i, j)
                                             : std::numeric_limits<double>::quiet_NaN();
                    test_table.scores(i, j) =
                        counts_test(i, j) > 0 ? test_table.scores(i, j) / counts_test(i, j)
                                              : std::numeric_limits<double>::quiet_NaN();
                }
            run.val_tables[key] = std::move(val_table);
            run.test_tables[key] = std::move(test_table);
        }
    }
    return run;
}

} // namespace posthoc
