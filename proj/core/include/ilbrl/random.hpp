#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace ilbrl {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over a byte string. Stable across platforms and runs.
constexpr std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hierarchical seed derivation: master -> stage -> cell indices.
///
/// derive_seed(m, "train", {n, s}) is a pure function of its arguments, so a
/// cell's random stream never depends on scheduling order or worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                 std::initializer_list<std::uint64_t> cell = {}) {
    std::uint64_t h = mix_seed(master ^ fnv1a(stage));
    for (std::uint64_t c : cell) h = mix_seed(h ^ mix_seed(c));
    return h;
}

/// Random source with platform-independent sampling routines.
///
/// Only the raw 64-bit engine output is consumed; the conversions below are
/// defined here rather than through <random> distributions so that datasets
/// are bit-identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); unbiased (Lemire's method).
    std::size_t below(std::size_t n) {
        std::uint64_t x = engine_();
        auto m = static_cast<uint128>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(n)) % n;
            while (low < threshold) {
                x = engine_();
                m = static_cast<uint128>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    /// Draw an index from an (approximately) normalised probability vector.
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform();
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) continue;
            acc += probs[i];
            last_positive = i;
            if (u < acc) return i;
        }
        return last_positive;
    }

    /// Standard exponential variate (used for Dirichlet draws).
    double exponential() {
        double u = uniform();
        while (u == 0.0) u = uniform();
        return -std::log(u);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ilbrl
