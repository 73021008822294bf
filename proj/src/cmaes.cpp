#include "posthoc/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "posthoc/aggregate.hpp"

namespace posthoc {

namespace {

using EMatrix = Eigen::MatrixXd;
using EVector = Eigen::VectorXd;

EMatrix to_eigen(const std::vector<double>& flat, int n) {
    EMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = flat[static_cast<std::size_t>(i) * n + j];
    return m;
}

void from_eigen(const EMatrix& m, std::vector<double>& flat, int n) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) flat[static_cast<std::size_t>(i) * n + j] = m(i, j);
}

} // namespace

CmaesOptimizer::CmaesOptimizer(const CmaesParams& params)
    : n_(params.n),
      sigma0_(params.sigma0),
      sigma_(params.sigma0),
      tells_since_eig_(0),
      iteration_(0),
      eval_count_(0),
      reset_happened_(false),
      rng_(params.seed),
      best_loss_(std::numeric_limits<double>::infinity()) {
    if (n_ < 1) throw Error("CmaesOptimizer: dimension must be positive");
    if (sigma0_ <= 0.0) throw Error("CmaesOptimizer: sigma0 must be positive");

    lambda_ = params.lambda > 0
                  ? params.lambda
                  : 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n_))));
    if (lambda_ < 2) throw Error("CmaesOptimizer: lambda must be >= 2");
    mu_ = lambda_ / 2;

    rec_weights_.resize(mu_);
    double wsum = 0.0;
    for (int i = 0; i < mu_; ++i) {
        rec_weights_[i] = std::log((lambda_ + 1.0) / 2.0) - std::log(i + 1.0);
        wsum += rec_weights_[i];
    }
    double w2sum = 0.0;
    for (double& w : rec_weights_) {
        w /= wsum;
        w2sum += w * w;
    }
    mu_eff_ = 1.0 / w2sum;

    const double n = static_cast<double>(n_);
    c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
    d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
    c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
    c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
    c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                     ((n + 2.0) * (n + 2.0) + mu_eff_));
    chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    eig_refresh_period_ =
        std::max(1, static_cast<int>(std::floor(1.0 / (10.0 * n * (c_1_ + c_mu_)))));

    mean_ = params.x0.empty() ? std::vector<double>(n_, 0.0) : params.x0;
    if (static_cast<int>(mean_.size()) != n_)
        throw LengthMismatch("CmaesOptimizer: x0 length does not match dimension");

    cov_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i) cov_[static_cast<std::size_t>(i) * n_ + i] = 1.0;
    eig_vecs_ = cov_;
    eig_sqrt_.assign(n_, 1.0);
    p_sigma_.assign(n_, 0.0);
    p_c_.assign(n_, 0.0);
    pending_.assign(lambda_, std::vector<double>(n_, 0.0));
}

void CmaesOptimizer::refresh_eigensystem() {
    // enforce symmetry before decomposing
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
            const double v = 0.5 * (cov_[static_cast<std::size_t>(i) * n_ + j] +
                                    cov_[static_cast<std::size_t>(j) * n_ + i]);
            cov_[static_cast<std::size_t>(i) * n_ + j] = v;
            cov_[static_cast<std::size_t>(j) * n_ + i] = v;
        }
    bool finite = true;
    for (double v : cov_)
        if (!std::isfinite(v)) {
            finite = false;
            break;
        }
    if (finite) {
        Eigen::SelfAdjointEigenSolver<EMatrix> solver(to_eigen(cov_, n_));
        if (solver.info() == Eigen::Success) {
            EVector evals = solver.eigenvalues();
            const double max_eval = evals.maxCoeff();
            if (std::isfinite(max_eval) && max_eval > 0.0) {
                // clamp slightly negative eigenvalues from roundoff
                const double floor_val = 1e-14 * max_eval;
                bool repairable = true;
                for (int i = 0; i < n_; ++i) {
                    if (evals(i) < -1e-8 * max_eval) repairable = false;
                    if (evals(i) < floor_val) evals(i) = floor_val;
                }
                if (repairable) {
                    const EMatrix& b = solver.eigenvectors();
                    from_eigen(b, eig_vecs_, n_);
                    for (int i = 0; i < n_; ++i) eig_sqrt_[i] = std::sqrt(evals(i));
                    tells_since_eig_ = 0;
                    return;
                }
            }
        }
    }
    reset_distribution();
}

void CmaesOptimizer::reset_distribution() {
    // divergence repair: restart the search distribution at the best point
    cov_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i) cov_[static_cast<std::size_t>(i) * n_ + i] = 1.0;
    eig_vecs_ = cov_;
    eig_sqrt_.assign(n_, 1.0);
    p_sigma_.assign(n_, 0.0);
    p_c_.assign(n_, 0.0);
    sigma_ = sigma0_;
    if (!best_x_.empty()) mean_ = best_x_;
    for (double& v : mean_)
        if (!std::isfinite(v)) v = 0.0;
    tells_since_eig_ = 0;
    reset_happened_ = true;
}

const std::vector<std::vector<double>>& CmaesOptimizer::ask() {
    if (tells_since_eig_ >= eig_refresh_period_) refresh_eigensystem();
    std::vector<double> z(n_);
    for (int k = 0; k < lambda_; ++k) {
        for (int i = 0; i < n_; ++i) z[i] = rng_.normal() * eig_sqrt_[i];
        // x = mean + sigma * B * (D .* z)
        for (int i = 0; i < n_; ++i) {
            double acc = 0.0;
            const double* brow = eig_vecs_.data() + static_cast<std::size_t>(i) * n_;
            for (int j = 0; j < n_; ++j) acc += brow[j] * z[j];
            pending_[k][i] = mean_[i] + sigma_ * acc;
        }
    }
    return pending_;
}

void CmaesOptimizer::observe(const std::vector<double>& x, double loss) {
    if (!std::isfinite(loss)) throw NonFiniteLoss("observe: non-finite loss");
    ++eval_count_;
    if (loss < best_loss_) {
        best_loss_ = loss;
        best_x_ = x;
    }
}

void CmaesOptimizer::tell(const std::vector<std::vector<double>>& candidates,
                          const std::vector<double>& losses) {
    if (candidates.size() != losses.size() || static_cast<int>(candidates.size()) != lambda_)
        throw LengthMismatch("tell: expected one loss per candidate, lambda of each");
    for (double l : losses)
        if (!std::isfinite(l)) throw NonFiniteLoss("tell: non-finite loss");

    ++iteration_;
    eval_count_ += lambda_;

    std::vector<int> order(lambda_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return losses[a] < losses[b]; });

    if (losses[order[0]] < best_loss_) {
        best_loss_ = losses[order[0]];
        best_x_ = candidates[order[0]];
    }

    const std::vector<double> old_mean = mean_;
    std::fill(mean_.begin(), mean_.end(), 0.0);
    for (int r = 0; r < mu_; ++r) {
        const std::vector<double>& x = candidates[order[r]];
        for (int i = 0; i < n_; ++i) mean_[i] += rec_weights_[r] * x[i];
    }

    // y = (mean - old_mean) / sigma and its whitened image C^{-1/2} y
    std::vector<double> y(n_), y_white(n_);
    for (int i = 0; i < n_; ++i) y[i] = (mean_[i] - old_mean[i]) / sigma_;
    std::vector<double> tmp(n_, 0.0);
    for (int j = 0; j < n_; ++j) {  // tmp = B^T y
        double acc = 0.0;
        for (int i = 0; i < n_; ++i) acc += eig_vecs_[static_cast<std::size_t>(i) * n_ + j] * y[i];
        tmp[j] = acc / eig_sqrt_[j];
    }
    for (int i = 0; i < n_; ++i) {  // y_white = B tmp
        double acc = 0.0;
        const double* brow = eig_vecs_.data() + static_cast<std::size_t>(i) * n_;
        for (int j = 0; j < n_; ++j) acc += brow[j] * tmp[j];
        y_white[i] = acc;
    }

    const double cs_fac = std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_);
    double ps_norm2 = 0.0;
    for (int i = 0; i < n_; ++i) {
        p_sigma_[i] = (1.0 - c_sigma_) * p_sigma_[i] + cs_fac * y_white[i];
        ps_norm2 += p_sigma_[i] * p_sigma_[i];
    }
    const double ps_norm = std::sqrt(ps_norm2);

    const double denom =
        std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * static_cast<double>(iteration_)));
    const bool hsig = ps_norm / denom / chi_n_ < 1.4 + 2.0 / (n_ + 1.0);

    const double cc_fac = std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_);
    for (int i = 0; i < n_; ++i)
        p_c_[i] = (1.0 - c_c_) * p_c_[i] + (hsig ? cc_fac * y[i] : 0.0);

    const double c1a = c_1_ * (1.0 - (hsig ? 0.0 : 1.0) * c_c_ * (2.0 - c_c_));
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            double v = (1.0 - c1a - c_mu_) * cov_[static_cast<std::size_t>(i) * n_ + j] +
                       c_1_ * p_c_[i] * p_c_[j];
            cov_[static_cast<std::size_t>(i) * n_ + j] = v;
        }
    }
    std::vector<double> yk(n_);
    for (int r = 0; r < mu_; ++r) {
        const std::vector<double>& x = candidates[order[r]];
        for (int i = 0; i < n_; ++i) yk[i] = (x[i] - old_mean[i]) / sigma_;
        const double wr = c_mu_ * rec_weights_[r];
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                cov_[static_cast<std::size_t>(i) * n_ + j] += wr * yk[i] * yk[j];
    }
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
            const double v = 0.5 * (cov_[static_cast<std::size_t>(i) * n_ + j] +
                                    cov_[static_cast<std::size_t>(j) * n_ + i]);
            cov_[static_cast<std::size_t>(i) * n_ + j] = v;
            cov_[static_cast<std::size_t>(j) * n_ + i] = v;
        }

    sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
    if (!std::isfinite(sigma_) || sigma_ <= 0.0) {
        reset_distribution();
        return;
    }

    ++tells_since_eig_;
}

namespace {

// loss of a raw CMA-ES proposal under the configured normalization
double eval_candidate(const PredictionSet& ps, const std::vector<double>& w, MetricKind metric,
                      Normalizer normalizer, int n_hyp) {
    switch (normalizer) {
        case Normalizer::None:
            return evaluate_weights(ps, w, metric, EvalMode::RawCmaes);
        case Normalizer::Softmax:
            return evaluate_weights(ps, softmax_norm(w).w, metric, EvalMode::Normalized);
        case Normalizer::ImplicitGes:
            return evaluate_weights(ps, implicit_ges_norm(w, n_hyp).w, metric,
                                    EvalMode::Normalized);
        case Normalizer::ExplicitGes:
            return evaluate_weights(ps, explicit_ges_norm(w, n_hyp).w, metric,
                                    EvalMode::Normalized);
    }
    throw Error("eval_candidate: unknown normalizer");
}

} // namespace

EnsembleFitResult cmaes_fit_ensemble(const PredictionSet& ps, MetricKind metric,
                                     Normalizer normalizer, std::uint64_t seed, int n_iters,
                                     double sigma0, int n_hyp) {
    require_pool_size(ps, 2, "cmaes");
    if (n_iters < 1) throw Error("cmaes_fit_ensemble: n_iters must be positive");
    const int m = ps.n_models;
    const std::size_t budget = static_cast<std::size_t>(m) * static_cast<std::size_t>(n_iters);

    // single best model on validation loss, ties to the lowest index
    int best_model = 0;
    double best_single = std::numeric_limits<double>::infinity();
    for (int b = 0; b < m; ++b) {
        WeightVector one_hot(m, 0.0);
        one_hot[b] = 1.0;
        const double l = evaluate_weights(ps, one_hot, metric, EvalMode::Normalized);
        if (l < best_single) {
            best_single = l;
            best_model = b;
        }
    }

    CmaesParams params;
    params.n = m;
    params.sigma0 = sigma0;
    params.seed = seed;
    params.x0.assign(m, 0.0);
    params.x0[best_model] = 1.0;
    CmaesOptimizer opt(params);

    // x0 is injected as the first evaluated candidate and counts against the
    // budget, so the single-best solution is always reachable.
    std::size_t used = 0;
    std::vector<double> best_x = params.x0;
    double best_loss = eval_candidate(ps, params.x0, metric, normalizer, n_hyp);
    const double x0_loss = best_loss;
    opt.observe(params.x0, best_loss);
    ++used;

    std::vector<double> losses;
    while (used < budget) {
        const auto& candidates = opt.ask();
        const std::size_t k =
            std::min<std::size_t>(candidates.size(), budget - used);
        losses.assign(candidates.size(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            losses[i] = eval_candidate(ps, candidates[i], metric, normalizer, n_hyp);
            if (losses[i] < best_loss) {
                best_loss = losses[i];
                best_x = candidates[i];
            }
        }
        used += k;
        if (k < candidates.size()) break;  // truncated final generation, budget exhausted
        opt.tell(candidates, losses);
    }

    EnsembleFitResult res;
    res.eval_count = used;
    res.best_loss = best_loss;
    res.x0_loss = x0_loss;
    switch (normalizer) {
        case Normalizer::None:
            res.weights = best_x;
            break;
        case Normalizer::Softmax:
            res.weights = softmax_norm(best_x).w;
            break;
        case Normalizer::ImplicitGes: {
            NormalizedWeights nw = implicit_ges_norm(best_x, n_hyp);
            res.weights = nw.w;
            res.reps = std::move(nw.reps);
            res.denom = nw.denom;
            break;
        }
        case Normalizer::ExplicitGes: {
            NormalizedWeights nw = explicit_ges_norm(best_x, n_hyp);
            res.weights = nw.w;
            res.reps = std::move(nw.reps);
            res.denom = nw.denom;
            break;
        }
    }
    return res;
}

} // namespace posthoc
