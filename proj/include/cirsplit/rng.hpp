#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace cirsplit {

/// splitmix64 finalizer; the basis for all seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash a master seed with a path of task ids (round, particle, path, ...)
/// into an independent stream seed. Every stochastic task derives its own
/// stream this way, so results never depend on thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t id : ids) s = mix64(s ^ mix64(id + 0x165667b19e3779f9ULL));
    return s;
}

/// A self-contained random stream. One instance per task; never shared.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    static RngStream derived(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
        return RngStream(derive_seed(master, ids));
    }

    /// Standard normal draw.
    double gauss() { return n01_(gen_); }
    double normal(double mean, double sd) { return mean + sd * n01_(gen_); }

    /// Uniform on [lo, hi).
    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double exponential(double rate) {
        return std::exponential_distribution<double>(rate)(gen_);
    }

    double gamma(double shape, double scale) {
        return std::gamma_distribution<double>(shape, scale)(gen_);
    }

    std::uint64_t poisson(double mean) {
        return static_cast<std::uint64_t>(std::poisson_distribution<long long>(mean)(gen_));
    }

    /// Index draw proportional to nonnegative weights (need not be normalized).
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform(0.0, total);
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    std::uint64_t raw() { return gen_(); }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> n01_{0.0, 1.0};
};

} // namespace cirsplit
