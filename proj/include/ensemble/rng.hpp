#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "ensemble/errors.hpp"

namespace ensemble {

// splitmix64 finalizer. Used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for item `index` of a run seeded with `base`. Independent of the order
// in which items are processed, so parallel and serial runs agree.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return splitmix64(base ^ splitmix64(index));
}

// Reproducible random stream. Only the engine comes from <random> (its output
// sequence is fixed by the standard); every distribution is implemented here
// so results do not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lower, double upper) { return lower + (upper - lower) * uniform(); }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        // Lemire-style rejection keeps it unbiased.
        const std::uint64_t bound = n;
        const std::uint64_t limit = (~std::uint64_t{0} - bound + 1) % bound;
        std::uint64_t x = engine_();
        while (x < limit) x = engine_();
        return static_cast<std::size_t>(x % bound);
    }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Binomial(n, p) sampler by CDF inversion. The table is built once so that
// repeated draws at a fixed (n, p) cost one binary search each.
class BinomialTable {
public:
    BinomialTable() = default;

    BinomialTable(int trials, double p) : trials_(trials) {
        if (trials < 0) throw InvalidInput("binomial trial count must be non-negative");
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("binomial probability outside [0, 1]");
        cdf_.resize(static_cast<std::size_t>(trials) + 1);
        if (p == 0.0 || p == 1.0) {
            std::fill(cdf_.begin(), cdf_.end(), p == 0.0 ? 1.0 : 0.0);
            cdf_.back() = 1.0;
            return;
        }
        const double log_p = std::log(p);
        const double log_q = std::log1p(-p);
        const double log_n_fact = std::lgamma(trials + 1.0);
        double running = 0.0;
        for (int x = 0; x <= trials; ++x) {
            const double log_pmf = log_n_fact - std::lgamma(x + 1.0) - std::lgamma(trials - x + 1.0) +
                                   x * log_p + (trials - x) * log_q;
            running += std::exp(log_pmf);
            cdf_[static_cast<std::size_t>(x)] = running;
        }
        for (double& c : cdf_) c /= running;
        cdf_.back() = 1.0;
    }

    int trials() const noexcept { return trials_; }

    int draw(Rng& rng) const {
        const double u = rng.uniform();
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<int>(it - cdf_.begin());
    }

    std::span<const double> cdf() const noexcept { return cdf_; }

private:
    int trials_ = 0;
    std::vector<double> cdf_;
};

}  // namespace ensemble
