#include "posthoc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "posthoc/dataset_io.hpp"
#include "posthoc/rng.hpp"

namespace fs = std::filesystem;

namespace posthoc {

void GenSpec::validate() const {
    auto bad = [](const std::string& what) { throw ConfigError("generate_synthetic: " + what); };
    if (n_datasets < 1) bad("n_datasets must be positive");
    if (n_folds < 1) bad("n_folds must be positive");
    if (m_min < 2 || m_max < m_min) bad("model count range invalid (need 2 <= m_min <= m_max)");
    if (c_min < 2 || c_max < c_min) bad("class count range invalid");
    if (n_val_min < 1 || n_val_max < n_val_min) bad("validation size range invalid");
    if (n_test_min < 1 || n_test_max < n_test_min) bad("test size range invalid");
    if (signal_min < 0 || signal_max < signal_min) bad("signal range invalid");
    if (shared_noise_min < 0 || shared_noise_max < shared_noise_min)
        bad("shared noise range invalid");
    if (private_noise_min < 0 || private_noise_max < private_noise_min)
        bad("private noise range invalid");
    if (complementary_pair && m_min < 2) bad("complementary pair needs m >= 2");
}

namespace {

struct ModelProfile {
    double signal;
    double shared;   // signed shared-noise coefficient
    double priv;
};

PredictionSet draw_split(Rng& rng, int n, int m, int c,
                         const std::vector<ModelProfile>& profiles,
                         const std::vector<std::string>& names) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(rng.uniform_int(0, c - 1));
    // make sure every class appears so metric preconditions hold
    for (int k = 0; k < c && k < n; ++k) labels[k] = k;

    std::vector<double> flat(static_cast<std::size_t>(n) * m * c);
    std::vector<double> shared_z(c), logits(c);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < c; ++k) shared_z[k] = rng.normal();
        for (int b = 0; b < m; ++b) {
            const ModelProfile& p = profiles[b];
            double mx = -1e300;
            for (int k = 0; k < c; ++k) {
                double v = p.signal * (labels[i] == k ? 1.0 : 0.0) + p.shared * shared_z[k];
                if (p.priv != 0.0) v += p.priv * rng.normal();
                logits[k] = v;
                mx = std::max(mx, v);
            }
            double sum = 0.0;
            for (int k = 0; k < c; ++k) {
                logits[k] = std::exp(logits[k] - mx);
                sum += logits[k];
            }
            double* dst = flat.data() + (static_cast<std::size_t>(i) * m + b) * c;
            for (int k = 0; k < c; ++k) dst[k] = logits[k] / sum;
        }
    }
    return validate_prediction_set(flat, labels, names, m, c);
}

} // namespace

std::vector<std::string> generate_synthetic(const GenSpec& spec, const fs::path& out_root) {
    spec.validate();
    fs::create_directories(out_root);
    std::vector<std::string> names;

    for (int d = 0; d < spec.n_datasets; ++d) {
        Rng rng(stable_hash64(stable_hash64(spec.seed + 1, "dataset"),
                              static_cast<std::uint64_t>(d)));
        const int m = static_cast<int>(rng.uniform_int(spec.m_min, spec.m_max));
        // alternate binary / multiclass datasets when the class range spans both
        int c;
        if (d % 2 == 0 && spec.c_min <= 2)
            c = 2;
        else if (spec.c_max >= 3)
            c = static_cast<int>(rng.uniform_int(std::max(3, spec.c_min), spec.c_max));
        else
            c = 2;
        const int n_val = static_cast<int>(rng.uniform_int(spec.n_val_min, spec.n_val_max));
        const int n_test = static_cast<int>(rng.uniform_int(spec.n_test_min, spec.n_test_max));

        std::vector<ModelProfile> profiles(m);
        for (int b = 0; b < m; ++b) {
            profiles[b].signal = rng.uniform(spec.signal_min, spec.signal_max);
            const double mag = rng.uniform(spec.shared_noise_min, spec.shared_noise_max);
            profiles[b].shared = (rng.uniform() < 0.5 ? -1.0 : 1.0) * mag;
            profiles[b].priv = rng.uniform(spec.private_noise_min, spec.private_noise_max);
        }
        if (spec.complementary_pair) {
            const double s = std::max(spec.signal_max, 1.0);
            const double z = std::max(spec.shared_noise_max, 1.0);
            profiles[0] = {s, +z, 0.0};
            profiles[1] = {s, -z, 0.0};
        }

        char buf[32];
        std::snprintf(buf, sizeof(buf), "synth_%03d", d);
        const std::string name = buf;
        names.push_back(name);

        DatasetMeta meta;
        meta.name = name;
        meta.task_type = c == 2 ? "binary" : "multiclass";
        meta.n_classes = c;
        meta.n_folds = spec.n_folds;
        for (int b = 0; b < m; ++b) {
            std::snprintf(buf, sizeof(buf), "model_%02d", b);
            meta.model_names.emplace_back(buf);
        }
        for (int k = 0; k < c; ++k) meta.label_map["class_" + std::to_string(k)] = k;

        const fs::path dataset_dir = out_root / name;
        write_meta(dataset_dir, meta);
        for (int f = 0; f < spec.n_folds; ++f) {
            const fs::path fold_dir = dataset_dir / ("fold_" + std::to_string(f));
            PredictionSet val = draw_split(rng, n_val, m, c, profiles, meta.model_names);
            PredictionSet test = draw_split(rng, n_test, m, c, profiles, meta.model_names);
            write_prediction_csv(fold_dir / "val.csv", val);
            write_prediction_csv(fold_dir / "test.csv", test);
        }
    }
    return names;
}

} // namespace posthoc
