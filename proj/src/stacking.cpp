#include "posthoc/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace posthoc {

Matrix stacker_features(const PredictionSet& ps) {
    const std::size_t n = ps.n_instances;
    const std::size_t d = static_cast<std::size_t>(ps.n_models) * ps.n_classes;
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (int b = 0; b < ps.n_models; ++b) {
            const double* src = ps.instance_row(b, static_cast<int>(i));
            std::copy(src, src + ps.n_classes,
                      x.row(i) + static_cast<std::size_t>(b) * ps.n_classes);
        }
    return x;
}

namespace {

// probs = rowwise softmax(X coef^T + intercept)
Matrix forward(const Matrix& x, const Matrix& coef, const std::vector<double>& intercept) {
    const std::size_t n = x.rows;
    const std::size_t c = coef.rows;
    Matrix probs(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c; ++k) {
            double acc = intercept[k];
            const double* w = coef.row(k);
            const double* xi = x.row(i);
            for (std::size_t j = 0; j < x.cols; ++j) acc += w[j] * xi[j];
            probs(i, k) = acc;
            mx = std::max(mx, acc);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            probs(i, k) = std::exp(probs(i, k) - mx);
            sum += probs(i, k);
        }
        for (std::size_t k = 0; k < c; ++k) probs(i, k) /= sum;
    }
    return probs;
}

} // namespace

double stacker_objective(const Matrix& features, const std::vector<int>& labels, int n_classes,
                         const Matrix& coef, const std::vector<double>& intercept,
                         double lambda_reg, Matrix* grad_coef,
                         std::vector<double>* grad_intercept) {
    const std::size_t n = features.rows;
    if (labels.size() != n) throw DimensionMismatch("stacker_objective: label count mismatch");
    if (coef.rows != static_cast<std::size_t>(n_classes) || coef.cols != features.cols)
        throw DimensionMismatch("stacker_objective: coefficient shape mismatch");

    Matrix probs = forward(features, coef, intercept);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        loss -= std::log(std::max(probs(i, labels[i]), 1e-300));
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double v : coef.data) reg += v * v;
    loss += reg / (2.0 * lambda_reg * static_cast<double>(n));

    if (grad_coef != nullptr || grad_intercept != nullptr) {
        Matrix gw(coef.rows, coef.cols, 0.0);
        std::vector<double> gb(n_classes, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = features.row(i);
            for (int k = 0; k < n_classes; ++k) {
                const double delta = probs(i, k) - (labels[i] == k ? 1.0 : 0.0);
                gb[k] += delta;
                double* grow = gw.row(k);
                for (std::size_t j = 0; j < features.cols; ++j) grow[j] += delta * xi[j];
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (double& v : gw.data) v *= inv_n;
        for (double& v : gb) v *= inv_n;
        for (std::size_t t = 0; t < gw.data.size(); ++t)
            gw.data[t] += coef.data[t] / (lambda_reg * static_cast<double>(n));
        if (grad_coef != nullptr) *grad_coef = std::move(gw);
        if (grad_intercept != nullptr) *grad_intercept = std::move(gb);
    }
    return loss;
}

StackerModel stacker_fit(const PredictionSet& ps, std::size_t budget, double lambda_reg) {
    {
        std::set<int> present(ps.labels.begin(), ps.labels.end());
        if (present.size() < 2)
            throw SingleClassError("stacker_fit: need at least 2 classes in labels");
    }
    const Matrix x = stacker_features(ps);
    const int c = ps.n_classes;

    StackerModel model;
    model.lambda_reg = lambda_reg;
    model.max_epochs = static_cast<int>(budget);
    model.coef = Matrix(c, x.cols, 0.0);
    model.intercept.assign(c, 0.0);

    Matrix grad_w;
    std::vector<double> grad_b;
    double loss =
        stacker_objective(x, ps.labels, c, model.coef, model.intercept, lambda_reg, &grad_w, &grad_b);

    for (std::size_t epoch = 0; epoch < budget; ++epoch) {
        double gnorm2 = 0.0;
        for (double v : grad_w.data) gnorm2 += v * v;
        for (double v : grad_b) gnorm2 += v * v;
        model.final_grad_norm = std::sqrt(gnorm2);
        if (model.final_grad_norm < 1e-8) break;

        // Armijo backtracking: f(theta - a g) <= f(theta) - 1e-4 * a * ||g||^2
        double alpha = 1.0;
        Matrix trial_w(c, x.cols);
        std::vector<double> trial_b(c);
        double trial_loss = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t t = 0; t < trial_w.data.size(); ++t)
                trial_w.data[t] = model.coef.data[t] - alpha * grad_w.data[t];
            for (int k = 0; k < c; ++k) trial_b[k] = model.intercept[k] - alpha * grad_b[k];
            trial_loss =
                stacker_objective(x, ps.labels, c, trial_w, trial_b, lambda_reg, nullptr, nullptr);
            if (trial_loss <= loss - 1e-4 * alpha * gnorm2) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        model.coef = std::move(trial_w);
        model.intercept = std::move(trial_b);
        loss = trial_loss;
        model.epochs_used = static_cast<int>(epoch) + 1;
        stacker_objective(x, ps.labels, c, model.coef, model.intercept, lambda_reg, &grad_w,
                          &grad_b);
    }
    model.final_loss = loss;
    return model;
}

Matrix stacker_predict(const StackerModel& model, const PredictionSet& ps) {
    const Matrix x = stacker_features(ps);
    if (x.cols != model.coef.cols)
        throw DimensionMismatch("stacker_predict: feature dimension " + std::to_string(x.cols) +
                                " vs model " + std::to_string(model.coef.cols));
    return forward(x, model.coef, model.intercept);
}

} // namespace posthoc
