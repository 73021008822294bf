#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "posthoc/errors.hpp"

namespace posthoc {

enum class TaskType { Binary, MultiClass };

struct TaskKind {
    TaskType kind;
    int n_classes;

    static TaskKind from_classes(int n_classes) {
        if (n_classes < 2)
            throw Error("TaskKind: n_classes must be >= 2, got " + std::to_string(n_classes));
        return {n_classes == 2 ? TaskType::Binary : TaskType::MultiClass, n_classes};
    }
};

enum class MetricKind { BalancedAccuracy, RocAuc };

enum class Split { Validation, Test };

struct Score {
    double value = 0.0;
    MetricKind metric = MetricKind::BalancedAccuracy;
    // higher is always better for both metrics
};

// The optimization variable: one real weight per base model.
using WeightVector = std::vector<double>;

// Dense row-major matrix, the shape used for aggregated predictions [n x c]
// and stacker coefficients.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

// Per-split tensor of base-model class-probability predictions plus labels.
// probs is stored model-major: probs[((b * n_instances) + i) * n_classes + k].
// Immutable after construction; safe to share across threads.
struct PredictionSet {
    int n_models = 0;
    int n_instances = 0;
    int n_classes = 0;
    std::vector<double> probs;
    std::vector<int> labels;
    std::vector<std::string> model_names;

    double prob(int b, int i, int k) const {
        return probs[(static_cast<std::size_t>(b) * n_instances + i) * n_classes + k];
    }
    const double* instance_row(int b, int i) const {
        return probs.data() + (static_cast<std::size_t>(b) * n_instances + i) * n_classes;
    }
    TaskKind task() const { return TaskKind::from_classes(n_classes); }
};

struct FoldData {
    std::string dataset_name;
    int fold_id = 0;
    PredictionSet val;
    PredictionSet test;
};

// Validates raw instance-major rows and builds a PredictionSet.
// Probability rows must have entries in [0,1] and sum to 1 within 1e-6; rows
// are then renormalized so that the left-to-right sum is exactly 1.0.
// flat_probs layout: [instance][model][class], i.e. the CSV column order
// m0_c0..m0_c{c-1}, m1_c0, ...
PredictionSet validate_prediction_set(const std::vector<double>& flat_probs,
                                      const std::vector<int>& labels,
                                      const std::vector<std::string>& model_names,
                                      int n_models, int n_classes);

// Throws ModelCountMismatch when the pool is too small for a method.
void require_pool_size(const PredictionSet& ps, int min_models, const std::string& method);

} // namespace posthoc
