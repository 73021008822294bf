#include "posthoc/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace posthoc {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw FormatError(context + ": cannot parse '" + s + "' as a number");
    return v;
}

DatasetMeta read_meta(const fs::path& dataset_dir) {
    const fs::path path = dataset_dir / "meta.json";
    std::ifstream in(path);
    if (!in) throw FormatError("missing " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    DatasetMeta meta;
    try {
        meta.name = j.at("name").get<std::string>();
        meta.task_type = j.at("task_type").get<std::string>();
        meta.n_classes = j.at("n_classes").get<int>();
        meta.model_names = j.at("model_names").get<std::vector<std::string>>();
        meta.n_folds = j.at("n_folds").get<int>();
        for (const auto& [key, value] : j.at("label_map").items())
            meta.label_map[key] = value.get<int>();
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (meta.task_type != "binary" && meta.task_type != "multiclass")
        throw MetadataMismatch(path.string() + ": unknown task_type '" + meta.task_type + "'");
    if ((meta.task_type == "binary") != (meta.n_classes == 2))
        throw MetadataMismatch(path.string() + ": task_type does not match n_classes");
    return meta;
}

void write_meta(const fs::path& dataset_dir, const DatasetMeta& meta) {
    fs::create_directories(dataset_dir);
    json j;
    j["name"] = meta.name;
    j["task_type"] = meta.task_type;
    j["n_classes"] = meta.n_classes;
    j["model_names"] = meta.model_names;
    j["n_folds"] = meta.n_folds;
    j["label_map"] = json::object();
    for (const auto& [key, value] : meta.label_map) j["label_map"][key] = value;
    std::ofstream out(dataset_dir / "meta.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dataset_dir / "meta.json").string());
    out << j.dump(2) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) fields.push_back(cur);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

PredictionSet read_prediction_csv(const fs::path& csv_path, const DatasetMeta& meta) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw FormatError("missing " + csv_path.string());
    const int m = static_cast<int>(meta.model_names.size());
    const int c = meta.n_classes;
    const std::size_t expected_cols = 2 + static_cast<std::size_t>(m) * c;

    std::string line;
    if (!std::getline(in, line)) throw FormatError(csv_path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() != expected_cols)
        throw MetadataMismatch(csv_path.string() + ": " + std::to_string(header.size()) +
                               " columns, meta.json implies " + std::to_string(expected_cols));
    if (header[0] != "instance_id" || header[1] != "label")
        throw FormatError(csv_path.string() + ": header must start with instance_id,label");

    std::vector<double> flat;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = csv_path.string() + ":" + std::to_string(line_no);
        if (fields.size() != expected_cols)
            throw FormatError(where + ": expected " + std::to_string(expected_cols) +
                              " fields, got " + std::to_string(fields.size()));
        int label = 0;
        const auto lres =
            std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
        if (lres.ec != std::errc() || lres.ptr != fields[1].data() + fields[1].size())
            throw FormatError(where + ": label '" + fields[1] + "' is not an integer");
        labels.push_back(label);
        for (std::size_t f = 2; f < fields.size(); ++f)
            flat.push_back(parse_double(fields[f], where));
    }
    if (labels.empty()) throw FormatError(csv_path.string() + ": no data rows");
    try {
        return validate_prediction_set(flat, labels, meta.model_names, m, c);
    } catch (const Error& e) {
        throw FormatError(csv_path.string() + ": " + e.what());
    }
}

void write_prediction_csv(const fs::path& csv_path, const PredictionSet& ps) {
    fs::create_directories(csv_path.parent_path());
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + csv_path.string());
    out << "instance_id,label";
    for (int b = 0; b < ps.n_models; ++b)
        for (int k = 0; k < ps.n_classes; ++k) out << ",m" << b << "_c" << k;
    out << '\n';
    for (int i = 0; i < ps.n_instances; ++i) {
        out << i << ',' << ps.labels[i];
        for (int b = 0; b < ps.n_models; ++b) {
            const double* row = ps.instance_row(b, i);
            for (int k = 0; k < ps.n_classes; ++k) out << ',' << format_double(row[k]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + csv_path.string());
}

std::vector<FoldData> ingest_dataset(const fs::path& dataset_dir) {
    const DatasetMeta meta = read_meta(dataset_dir);
    if (meta.n_folds < 1) throw MetadataMismatch(dataset_dir.string() + ": n_folds must be >= 1");
    std::vector<FoldData> folds;
    folds.reserve(meta.n_folds);
    for (int f = 0; f < meta.n_folds; ++f) {
        const fs::path fold_dir = dataset_dir / ("fold_" + std::to_string(f));
        FoldData fd;
        fd.dataset_name = meta.name;
        fd.fold_id = f;
        fd.val = read_prediction_csv(fold_dir / "val.csv", meta);
        fd.test = read_prediction_csv(fold_dir / "test.csv", meta);
        folds.push_back(std::move(fd));
    }
    return folds;
}

std::vector<std::string> list_datasets(const fs::path& data_root) {
    if (!fs::is_directory(data_root))
        throw FormatError("data root " + data_root.string() + " is not a directory");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(data_root))
        if (entry.is_directory() && fs::exists(entry.path() / "meta.json"))
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

} // namespace posthoc
