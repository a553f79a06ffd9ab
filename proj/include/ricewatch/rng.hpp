/*
 * Copyright 2026 the ricewatch authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ricewatch {

/// splitmix64 finalizer; the basis for all seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives a stream seed from (master, index). Used everywhere a master seed
/// fans out into per-plot / per-tree / per-candidate streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x51D2CC5B0CF3A17FULL));
}

/// Deterministic RNG. mt19937_64 supplies the bit stream; every distribution
/// mapping is implemented here with fixed formulas so that identical seeds
/// produce identical draws on every platform (std:: distribution objects
/// make no such guarantee).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform integer on [lo, hi], inclusive. Unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return lo + static_cast<std::int64_t>(next_u64());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % range);
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal01() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal01(); }

    /// Truncated normal on [lo, hi] by rejection, clamping after 256 failed
    /// draws (only reachable for pathological bounds). sigma == 0 returns mu
    /// exactly (clamped).
    double truncated_normal(double mu, double sigma, double lo, double hi) {
        if (sigma == 0.0) return mu < lo ? lo : (mu > hi ? hi : mu);
        for (int i = 0; i < 256; ++i) {
            const double x = normal(mu, sigma);
            if (x >= lo && x <= hi) return x;
        }
        const double x = normal(mu, sigma);
        return x < lo ? lo : (x > hi ? hi : x);
    }

    /// Fisher-Yates draw of k distinct values from [0, n).
    template <typename IntT>
    void sample_without_replacement(IntT n, IntT k, std::vector<IntT>& out) {
        out.resize(static_cast<std::size_t>(n));
        for (IntT i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
        for (IntT i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(uniform_int(i, n - 1));
            std::swap(out[static_cast<std::size_t>(i)], out[j]);
        }
        out.resize(static_cast<std::size_t>(k));
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ricewatch
