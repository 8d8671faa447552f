#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <unordered_set>
#include <vector>

namespace odefs {

/// Derives a child seed from a parent seed and a stream id (splitmix64 finalizer).
/// Every random stream in a run hangs off the root seed through a fixed chain of
/// mix_seed calls, so partial reruns reproduce the corresponding slice of a full run.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream_id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic generator: mt19937_64 with hand-rolled value mappings, so the
/// produced sequences do not depend on the standard library's distribution
/// implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log argument.
    double uniform_open01() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// Box-Muller normal draw (two uniforms per value).
    double normal(double mean, double stddev) {
        const double two_pi = 6.283185307179586476925286766559;
        double u1 = uniform_open01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(two_pi * u2);
    }

    /// Uniform integer in [0, n), exact (rejection sampling).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    /// k distinct values from [0, n) via Floyd's algorithm; insertion order.
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
        std::vector<std::uint32_t> out;
        out.reserve(k);
        std::unordered_set<std::uint32_t> seen;
        seen.reserve(k * 2);
        for (std::uint32_t j = n - k; j < n; ++j) {
            auto t = static_cast<std::uint32_t>(below(j + 1));
            if (seen.insert(t).second) {
                out.push_back(t);
            } else {
                seen.insert(j);
                out.push_back(j);
            }
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace odefs
