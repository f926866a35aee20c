#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "ensemble/errors.hpp"

namespace ensemble {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double x) const noexcept { return x >= lower && x <= upper; }
    double clamp(double x) const noexcept { return std::clamp(x, lower, upper); }
    double midpoint() const noexcept { return 0.5 * (lower + upper); }
    double width() const noexcept { return upper - lower; }
};

// A point phi in the model parameter space. Ordering of the entries is defined
// by the model that owns the point (see each model's `estimand`).
class ParamPoint {
public:
    ParamPoint() = default;

    explicit ParamPoint(std::vector<double> values) : values_(std::move(values)) { check_finite(); }
    ParamPoint(std::initializer_list<double> values) : values_(values) { check_finite(); }

    ParamPoint(std::vector<double> values, std::span<const Interval> support) : values_(std::move(values)) {
        check_finite();
        if (support.size() != values_.size()) {
            throw InvalidInput("parameter point has " + std::to_string(values_.size()) +
                               " entries but support has " + std::to_string(support.size()));
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!support[i].contains(values_[i])) {
                throw InvalidInput("parameter entry " + std::to_string(i) + " = " + std::to_string(values_[i]) +
                                   " outside its support [" + std::to_string(support[i].lower) + ", " +
                                   std::to_string(support[i].upper) + "]");
            }
        }
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vector() const noexcept { return values_; }

    friend bool operator==(const ParamPoint&, const ParamPoint&) = default;

private:
    void check_finite() const {
        if (values_.empty()) throw InvalidInput("parameter point must have at least one entry");
        for (double v : values_) {
            if (!std::isfinite(v)) throw InvalidInput("parameter point has a non-finite entry");
        }
    }

    std::vector<double> values_;
};

struct EstimatePair {
    double t1 = 0.0;
    double t2 = 0.0;
};

// The two base estimates and the nuisance estimate computed from one dataset.
// Scalar models use length-1 t1/t2.
struct EstimatorTriple {
    std::vector<double> t1;
    std::vector<double> t2;
    std::vector<double> omega_hat;
};

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            compensation_ += (sum_ - t) + x;
        } else {
            compensation_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.compensation_);
    }

    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

inline constexpr double kDegenerateDenominator = 1e-12;

inline double combine(EstimatePair pair, double w) {
    if (!std::isfinite(w) || !std::isfinite(pair.t1) || !std::isfinite(pair.t2)) {
        throw InvalidInput("combine: non-finite weight or estimate");
    }
    return w * pair.t1 + (1.0 - w) * pair.t2;
}

struct WeightEstimate {
    double value = 0.0;
    // Delta-method Monte Carlo standard error of the ratio estimator.
    double standard_error = 0.0;
    std::size_t n_samples = 0;
};

// Streaming accumulator for the Monte Carlo optimal weight
//   w = sum (t2 - t1) t2 / sum (t1 - t2)^2.
// Mergeable, so partial accumulations from different workers can be combined.
//
// Also tracks the centered co-moments of d = T2 - T1 and T2, giving the
// sample-variance minimizer cov(d, T2) / var(d). The two agree in expectation
// when both estimators are unbiased; the centered form stays correct when an
// estimator carries finite-sample bias.
class WeightAccumulator {
public:
    void add(EstimatePair p) noexcept {
        const double a = (p.t2 - p.t1) * p.t2;
        const double b = (p.t1 - p.t2) * (p.t1 - p.t2);
        num_.add(a);
        den_.add(b);
        num_sq_.add(a * a);
        den_sq_.add(b * b);
        cross_.add(a * b);
        ++n_;

        // Welford co-moment update.
        const double d = p.t2 - p.t1;
        const double n = static_cast<double>(n_);
        const double dd = d - mean_d_;
        mean_d_ += dd / n;
        mean_t2_ += (p.t2 - mean_t2_) / n;
        m2_d_ += dd * (d - mean_d_);
        c_d_t2_ += dd * (p.t2 - mean_t2_);
    }

    void merge(const WeightAccumulator& o) noexcept {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double n = na + nb;
        const double delta_d = o.mean_d_ - mean_d_;
        const double delta_t2 = o.mean_t2_ - mean_t2_;
        m2_d_ += o.m2_d_ + delta_d * delta_d * na * nb / n;
        c_d_t2_ += o.c_d_t2_ + delta_d * delta_t2 * na * nb / n;
        mean_d_ += delta_d * nb / n;
        mean_t2_ += delta_t2 * nb / n;

        num_.merge(o.num_);
        den_.merge(o.den_);
        num_sq_.merge(o.num_sq_);
        den_sq_.merge(o.den_sq_);
        cross_.merge(o.cross_);
        n_ += o.n_;
    }

    // cov(T2 - T1, T2) / var(T2 - T1) over the sample.
    double centered_estimate() const {
        if (n_ < 2) throw InvalidInput("centered weight needs at least 2 pairs");
        if (!(m2_d_ >= kDegenerateDenominator)) {
            throw DegeneratePair("sample variance of T1 - T2 vanishes; T1 and T2 differ by a constant");
        }
        return c_d_t2_ / m2_d_;
    }

    std::size_t count() const noexcept { return n_; }

    WeightEstimate estimate() const {
        if (n_ < 2) throw InvalidInput("empirical_w_opt needs at least 2 pairs");
        const double den = den_.value();
        if (!(den >= kDegenerateDenominator)) {
            throw DegeneratePair("sum of (T1 - T2)^2 is " + std::to_string(den) +
                                 "; T1 and T2 coincide on this sample");
        }
        const double n = static_cast<double>(n_);
        const double w = num_.value() / den;
        // Var(a - w b) with E[a - w b] = 0 by construction of w.
        const double resid_sq = num_sq_.value() - 2.0 * w * cross_.value() + w * w * den_sq_.value();
        const double mean_b = den / n;
        const double var_resid = std::max(resid_sq, 0.0) / (n - 1.0);
        return {w, std::sqrt(var_resid / n) / mean_b, n_};
    }

private:
    CompensatedSum num_, den_, num_sq_, den_sq_, cross_;
    std::size_t n_ = 0;
    double mean_d_ = 0.0, mean_t2_ = 0.0, m2_d_ = 0.0, c_d_t2_ = 0.0;
};

inline WeightEstimate empirical_w_opt_with_error(std::span<const EstimatePair> pairs) {
    WeightAccumulator acc;
    for (const auto& p : pairs) {
        if (!std::isfinite(p.t1) || !std::isfinite(p.t2)) throw InvalidInput("empirical_w_opt: non-finite pair");
        acc.add(p);
    }
    return acc.estimate();
}

inline double empirical_w_opt(std::span<const EstimatePair> pairs) {
    return empirical_w_opt_with_error(pairs).value;
}

// Minimizer of the sample variance of w T1 + (1 - w) T2.
inline double empirical_w_opt_centered(std::span<const EstimatePair> pairs) {
    WeightAccumulator acc;
    for (const auto& p : pairs) {
        if (!std::isfinite(p.t1) || !std::isfinite(p.t2)) throw InvalidInput("empirical_w_opt: non-finite pair");
        acc.add(p);
    }
    return acc.centered_estimate();
}

// Variance reduction Lambda(w) = E[(T1 - T2)^2] (w_opt - w)^2 of the optimal
// combination relative to the combination with weight w.
inline double variance_reduction(double w, double w_opt, double var_diff) {
    if (!(var_diff > 0.0)) throw DegeneratePair("variance_reduction: E[(T1 - T2)^2] must be positive");
    const double gap = w_opt - w;
    return var_diff * gap * gap;
}

// Second moments of (T1, T2) over a sample.
struct PairMoments {
    double e_t1_sq = 0.0;
    double e_t2_sq = 0.0;
    double e_t1t2 = 0.0;
    std::size_t n_samples = 0;

    static PairMoments from_pairs(std::span<const EstimatePair> pairs) {
        if (pairs.empty()) throw InvalidInput("PairMoments: empty sample");
        CompensatedSum s11, s22, s12;
        for (const auto& p : pairs) {
            s11.add(p.t1 * p.t1);
            s22.add(p.t2 * p.t2);
            s12.add(p.t1 * p.t2);
        }
        const double n = static_cast<double>(pairs.size());
        PairMoments m{s11.value() / n, s22.value() / n, s12.value() / n, pairs.size()};
        m.validate();
        return m;
    }

    void validate() const {
        if (e_t1_sq < 0.0 || e_t2_sq < 0.0) throw InvalidInput("PairMoments: negative second moment");
        const double bound = e_t1_sq * e_t2_sq;
        if (e_t1t2 * e_t1t2 > bound * (1.0 + 1e-9)) throw InvalidInput("PairMoments: violates Cauchy-Schwarz");
    }

    double var_diff() const noexcept { return e_t1_sq + e_t2_sq - 2.0 * e_t1t2; }

    // Optimal weight implied by the moments; equals empirical_w_opt on the same sample.
    double w_opt() const {
        const double d = var_diff();
        if (!(d >= kDegenerateDenominator)) throw DegeneratePair("PairMoments: E[(T1 - T2)^2] vanishes");
        return (e_t2_sq - e_t1t2) / d;
    }
};

}  // namespace ensemble
