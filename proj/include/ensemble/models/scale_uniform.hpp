#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/prior.hpp"
#include "ensemble/rng.hpp"

namespace ensemble::models {

// x_i ~ Unif((1 - k) theta, (1 + k) theta) with known k.
inline std::vector<double> su_sample(double theta, double k, std::size_t n, Rng& rng) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput("scale-uniform: theta must be positive");
    if (!(k > 0.0 && k < 1.0)) throw InvalidInput("scale-uniform: k must lie in (0, 1)");
    if (n < 2) throw InvalidInput("scale-uniform: n must be >= 2");
    const double lower = (1.0 - k) * theta;
    const double upper = (1.0 + k) * theta;
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(lower, upper);
    return x;
}

inline std::vector<double> su_sample(double theta, double k, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return su_sample(theta, k, n, rng);
}

// Rao-Blackwellized estimator: midrange of the sample.
inline double su_t1_rao_blackwell(std::span<const double> x) {
    if (x.size() < 2) throw InvalidInput("scale-uniform: need at least 2 observations");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return 0.5 * (*lo + *hi);
}

// Bias-corrected MLE: x_(n) / (1 + k (n - 1) / (n + 1)).
inline double su_t2_corrected_mle(std::span<const double> x, double k) {
    if (x.size() < 2) throw InvalidInput("scale-uniform: need at least 2 observations");
    if (!(k > 0.0 && k < 1.0)) throw InvalidInput("scale-uniform: k must lie in (0, 1)");
    const double n = static_cast<double>(x.size());
    return *std::max_element(x.begin(), x.end()) / (1.0 + k * (n - 1.0) / (n + 1.0));
}

inline double su_sample_mean(std::span<const double> x) {
    if (x.empty()) throw InvalidInput("scale-uniform: empty sample");
    CompensatedSum s;
    for (double v : x) s.add(v);
    return s.value() / static_cast<double>(x.size());
}

// phi = (theta, k). theta is the estimand; k is known and passed through as
// the nuisance estimate.
class ScaleUniform {
public:
    struct Dataset {
        std::vector<double> x;
        double k = 0.0;
    };

    explicit ScaleUniform(std::size_t n, Interval theta_support = {0.2, 10.0}, std::vector<double> k_values = {0.1, 0.9})
        : n_(n), theta_support_(theta_support), k_values_(std::move(k_values)) {
        if (n_ < 2) throw InvalidInput("scale-uniform: n must be >= 2");
        if (!(theta_support_.lower > 0.0 && theta_support_.upper > theta_support_.lower)) {
            throw InvalidInput("scale-uniform: theta support must be a positive interval");
        }
        if (k_values_.empty()) throw InvalidInput("scale-uniform: need at least one k value");
        for (double k : k_values_) {
            if (!(k > 0.0 && k < 1.0)) throw InvalidInput("scale-uniform: k must lie in (0, 1)");
        }
    }

    static constexpr const char* id() { return "scale-uniform"; }
    std::size_t n() const noexcept { return n_; }
    std::size_t param_dim() const noexcept { return 2; }
    std::size_t output_dim() const noexcept { return 1; }

    std::vector<Interval> support() const { return {theta_support_, Interval{0.0, 1.0}}; }

    PriorSpec prior() const {
        return PriorSpec{{PriorCoordinate::continuous(theta_support_), PriorCoordinate::discrete(k_values_)}};
    }

    ParamPoint point(double theta, double k) const { return ParamPoint({theta, k}, support()); }

    auto sampler(const ParamPoint& phi) const {
        check_dim(phi);
        const double theta = phi[0];
        const double k = phi[1];
        const std::size_t n = n_;
        if (!(theta > 0.0) || !(k > 0.0 && k < 1.0)) throw InvalidInput("scale-uniform: invalid (theta, k)");
        return [theta, k, n](Rng& rng) { return Dataset{su_sample(theta, k, n, rng), k}; };
    }

    EstimatorTriple triple(const Dataset& d) const {
        return {{su_t1_rao_blackwell(d.x)}, {su_t2_corrected_mle(d.x, d.k)}, {d.k}};
    }

    // (T1, k): the known k stands in for the nuisance estimate.
    std::vector<double> network_input(const EstimatorTriple& t) const { return {t.t1.at(0), t.omega_hat.at(0)}; }

    std::vector<double> estimand(const ParamPoint& phi) const {
        check_dim(phi);
        return {phi[0]};
    }

private:
    void check_dim(const ParamPoint& phi) const {
        if (phi.size() != 2) throw InvalidInput("scale-uniform: phi must be (theta, k)");
    }

    std::size_t n_;
    Interval theta_support_;
    std::vector<double> k_values_;
};

}  // namespace ensemble::models
