#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

namespace posthoc {

// Deterministic RNG used everywhere randomness is needed: mt19937_64 for the
// stream (sequence fixed by the standard) plus explicit Box-Muller for
// normal deviates, so results do not depend on libstdc++'s distribution
// implementations. Reproducible per build.
class Rng {
public:
    static constexpr const char* algorithm_name = "mt19937_64+box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] inclusive (unbiased via rejection)
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so log is finite
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable 64-bit hash for deriving per-work-item seeds from a base seed and
// string/integer keys. FNV-1a; independent of std::hash.
inline std::uint64_t stable_hash64(std::uint64_t h, const std::string& s) {
    if (h == 0) h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t stable_hash64(std::uint64_t h, std::uint64_t v) {
    if (h == 0) h = 1469598103934665603ULL;
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffULL;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace posthoc
