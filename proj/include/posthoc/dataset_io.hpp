#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// On-disk layout: <root>/<dataset>/meta.json plus
// <root>/<dataset>/fold_<i>/{val,test}.csv. CSV columns:
// instance_id,label,m0_c0,...,m0_c{c-1},m1_c0,... — doubles are written in
// shortest round-trip form, so write-then-read is bit-identical.
struct DatasetMeta {
    std::string name;
    std::string task_type;  // "binary" | "multiclass"
    int n_classes = 0;
    std::vector<std::string> model_names;
    int n_folds = 0;
    std::map<std::string, int> label_map;
};

// Shortest decimal string that reads back to exactly the same double.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);

DatasetMeta read_meta(const std::filesystem::path& dataset_dir);
void write_meta(const std::filesystem::path& dataset_dir, const DatasetMeta& meta);

PredictionSet read_prediction_csv(const std::filesystem::path& csv_path, const DatasetMeta& meta);
void write_prediction_csv(const std::filesystem::path& csv_path, const PredictionSet& ps);

// Loads every fold of one dataset directory, validating per-fold consistency.
std::vector<FoldData> ingest_dataset(const std::filesystem::path& dataset_dir);

// Dataset directory names under a data root, sorted.
std::vector<std::string> list_datasets(const std::filesystem::path& data_root);

} // namespace posthoc
