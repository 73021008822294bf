#include "posthoc/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace posthoc {

namespace {

void check_finite(const std::vector<double>& raw, const char* op) {
    if (raw.empty()) throw Error(std::string(op) + ": empty weight vector");
    for (double v : raw)
        if (!std::isfinite(v)) throw NonFiniteInput(std::string(op) + ": non-finite weight");
}

NormalizedWeights uniform_fallback(std::size_t m, int n_hyp) {
    NormalizedWeights out;
    out.n_hyp = n_hyp;
    out.w.assign(m, 1.0 / static_cast<double>(m));
    out.nonzero_count = static_cast<int>(m);
    out.reps.assign(m, 1);
    out.denom = static_cast<long long>(m);
    return out;
}

NormalizedWeights from_reps(std::vector<long long> reps, long long denom, int n_hyp) {
    NormalizedWeights out;
    out.n_hyp = n_hyp;
    out.reps = std::move(reps);
    out.denom = denom;
    out.w.resize(out.reps.size());
    for (std::size_t i = 0; i < out.reps.size(); ++i) {
        out.w[i] = static_cast<double>(out.reps[i]) / static_cast<double>(denom);
        if (out.reps[i] > 0) ++out.nonzero_count;
    }
    return out;
}

} // namespace

long long round_half_up(double x) {
    return static_cast<long long>(std::floor(x + 0.5 + 1e-9));
}

NormalizedWeights softmax_norm(const std::vector<double>& raw) {
    check_finite(raw, "softmax_norm");
    NormalizedWeights out;
    out.w.resize(raw.size());
    const double mx = *std::max_element(raw.begin(), raw.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.w[i] = std::exp(raw[i] - mx);
        sum += out.w[i];
    }
    for (double& v : out.w) v /= sum;
    out.nonzero_count =
        static_cast<int>(std::count_if(out.w.begin(), out.w.end(), [](double v) { return v > 0.0; }));
    return out;
}

NormalizedWeights implicit_ges_norm(const std::vector<double>& raw, int n_hyp) {
    if (n_hyp < 1) throw Error("implicit_ges_norm: n_hyp must be positive");
    const NormalizedWeights s = softmax_norm(raw);
    std::vector<long long> reps(raw.size());
    long long total = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        reps[i] = round_half_up(s.w[i] * n_hyp);
        total += reps[i];
    }
    if (total == 0) return uniform_fallback(raw.size(), n_hyp);
    NormalizedWeights out = from_reps(std::move(reps), total, n_hyp);
    return out;
}

NormalizedWeights explicit_ges_norm(const std::vector<double>& raw, int n_hyp) {
    if (n_hyp < 1) throw Error("explicit_ges_norm: n_hyp must be positive");
    const std::size_t m = raw.size();
    NormalizedWeights s = softmax_norm(raw);

    // trim: anything the rounding step would zero out anyway
    const double threshold = 0.5 / static_cast<double>(n_hyp);
    bool any_nonzero = false;
    for (double& v : s.w) {
        if (v <= threshold)
            v = 0.0;
        else
            any_nonzero = true;
    }
    if (!any_nonzero) return uniform_fallback(m, n_hyp);

    std::vector<long long> reps(m, 0);
    long long total = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (s.w[i] > 0.0) reps[i] = round_half_up(s.w[i] * n_hyp);
        total += reps[i];
    }
    if (total == 0) return uniform_fallback(m, n_hyp);

    // nonzero entries ordered by rounded value ascending, ties to lower index
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < m; ++i)
        if (reps[i] > 0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return reps[a] < reps[b]; });
    const std::vector<long long> rounded = reps;

    if (total > n_hyp) {
        // One pass from lowest to highest valued entry suffices: the overflow
        // is at most half the nonzero count. Later passes keep entries >= 1
        // and only zero the smallest entries if a pass makes no progress.
        long long excess = total - n_hyp;
        int pass = 0;
        while (excess > 0) {
            ++pass;
            bool changed = false;
            for (std::size_t idx : order) {
                if (excess == 0) break;
                if (reps[idx] == 0) continue;
                if (pass == 1 || reps[idx] > 1) {
                    --reps[idx];
                    --excess;
                    changed = true;
                }
            }
            if (excess > 0 && !changed) {
                for (std::size_t idx : order) {
                    if (excess == 0) break;
                    if (reps[idx] == 1) {
                        reps[idx] = 0;
                        --excess;
                        changed = true;
                    }
                }
            }
            if (!changed)
                throw Error("explicit_ges_norm: cannot reduce repetition counts to n_hyp");
        }
    } else if (total < n_hyp) {
        // spread the deficit equally over nonzero entries; remainder units go
        // to the largest entries first, ties to lower index
        long long deficit = n_hyp - total;
        const long long z = static_cast<long long>(order.size());
        const long long base = deficit / z;
        long long rem = deficit % z;
        std::vector<std::size_t> desc = order;
        std::sort(desc.begin(), desc.end(), [&](std::size_t a, std::size_t b) {
            if (rounded[a] != rounded[b]) return rounded[a] > rounded[b];
            return a < b;
        });
        for (std::size_t idx : order) reps[idx] += base;
        for (std::size_t idx : desc) {
            if (rem == 0) break;
            ++reps[idx];
            --rem;
        }
    }

    return from_reps(std::move(reps), n_hyp, n_hyp);
}

} // namespace posthoc
