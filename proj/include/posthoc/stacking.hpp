#pragma once

#include <cstddef>
#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// Multinomial logistic regression over the concatenated base-model
// probabilities, L2-regularized, trained by full-batch gradient descent with
// Armijo backtracking. One accepted full-gradient step counts as one
// evaluation against the budget.
struct StackerModel {
    Matrix coef;                    // [c x (m*c)]
    std::vector<double> intercept;  // [c]
    double lambda_reg = 1.0;
    int max_epochs = 0;
    int epochs_used = 0;
    double final_loss = 0.0;
    double final_grad_norm = 0.0;
};

// Flattened [n x (m*c)] feature matrix in CSV column order
// (m0_c0..m0_c{c-1}, m1_c0, ...).
Matrix stacker_features(const PredictionSet& ps);

StackerModel stacker_fit(const PredictionSet& ps, std::size_t budget, double lambda_reg = 1.0);

// Rowwise softmax of the affine scores; rows sum to 1.
Matrix stacker_predict(const StackerModel& model, const PredictionSet& ps);

// Objective and gradient at (coef, intercept) for the given features/labels:
// mean cross-entropy plus ||coef||^2 / (2 * lambda_reg * n). Exposed so the
// gradient can be checked against finite differences.
double stacker_objective(const Matrix& features, const std::vector<int>& labels, int n_classes,
                         const Matrix& coef, const std::vector<double>& intercept,
                         double lambda_reg, Matrix* grad_coef = nullptr,
                         std::vector<double>* grad_intercept = nullptr);

} // namespace posthoc
