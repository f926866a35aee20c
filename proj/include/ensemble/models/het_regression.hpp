#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/prior.hpp"
#include "ensemble/rng.hpp"

namespace ensemble::models {

inline constexpr int kRegressionDim = 4;
inline constexpr double kWlsWeightCap = 1e5;
inline constexpr double kMaxDesignCondition = 1e12;

using Coefficients = Eigen::Vector4d;

struct RegressionDataset {
    Eigen::Matrix<double, Eigen::Dynamic, kRegressionDim> x;  // leading column is the intercept
    Eigen::VectorXd y;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(y.size()); }
};

// y_i ~ Normal(x_i' theta, (x_i' theta)^2), x_i = (1, u1, u2, u3), u ~ Unif(lo, hi).
inline RegressionDataset reg_sample(const Coefficients& theta, std::size_t n, Rng& rng,
                                    Interval covariate_bounds = {-2.0, 2.0}) {
    if (n < 8) throw InvalidInput("regression: n must be >= 8");
    if (!theta.allFinite()) throw InvalidInput("regression: theta must be finite");
    RegressionDataset d;
    const auto rows = static_cast<Eigen::Index>(n);
    d.x.resize(rows, kRegressionDim);
    d.y.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        d.x(i, 0) = 1.0;
        for (int j = 1; j < kRegressionDim; ++j) d.x(i, j) = rng.uniform(covariate_bounds.lower, covariate_bounds.upper);
        const double mean = d.x.row(i).dot(theta);
        d.y(i) = mean + std::abs(mean) * rng.normal();
    }
    return d;
}

inline RegressionDataset reg_sample(const Coefficients& theta, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return reg_sample(theta, n, rng);
}

namespace detail {

// Solves gram * beta = rhs with column-pivoted QR. The condition estimate is
// the ratio of extreme |R| diagonal entries.
inline Coefficients solve_normal_equations(const Eigen::Matrix4d& gram, const Eigen::Vector4d& rhs, const char* what) {
    if (!gram.allFinite() || !rhs.allFinite()) throw IllConditionedDesign(std::string(what) + ": non-finite design");
    const Eigen::ColPivHouseholderQR<Eigen::Matrix4d> qr(gram);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    const double largest = diag.maxCoeff();
    const double smallest = diag.minCoeff();
    if (!(smallest > 0.0) || largest / smallest > kMaxDesignCondition) {
        throw IllConditionedDesign(std::string(what) + ": design condition estimate exceeds 1e12");
    }
    return qr.solve(rhs);
}

}  // namespace detail

// Ordinary least squares (sum x x')^-1 sum x y.
inline Coefficients reg_t2_ols(const RegressionDataset& d) {
    const Eigen::Matrix4d gram = d.x.transpose() * d.x;
    const Eigen::Vector4d rhs = d.x.transpose() * d.y;
    return detail::solve_normal_equations(gram, rhs, "OLS");
}

inline Eigen::VectorXd wls_weights(const RegressionDataset& d, const Coefficients& theta_ols) {
    Eigen::VectorXd w(d.y.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double fitted = d.x.row(i).dot(theta_ols);
        w(i) = std::min(1.0 / (fitted * fitted), kWlsWeightCap);
    }
    return w;
}

// Weighted least squares with weights min(1 / (x_i' theta_L)^2, 1e5).
inline Coefficients reg_t1_wls(const RegressionDataset& d, const Coefficients& theta_ols) {
    const Eigen::VectorXd w = wls_weights(d, theta_ols);
    const Eigen::Matrix4d gram = d.x.transpose() * w.asDiagonal() * d.x;
    const Eigen::Vector4d rhs = d.x.transpose() * w.cwiseProduct(d.y);
    return detail::solve_normal_equations(gram, rhs, "WLS");
}

inline std::vector<double> to_vector(const Coefficients& c) { return {c(0), c(1), c(2), c(3)}; }

// phi = theta in R^4. T1 = WLS, T2 = OLS; the network input at estimation time
// is the WLS estimate itself.
class HetRegression {
public:
    using Dataset = RegressionDataset;

    explicit HetRegression(std::size_t n = 100, Interval theta_support = {-1.5, 1.5},
                           Interval covariate_bounds = {-2.0, 2.0})
        : n_(n), theta_support_(theta_support), covariate_bounds_(covariate_bounds) {
        if (n_ < 8) throw InvalidInput("regression: n must be >= 8");
        if (!(theta_support_.upper > theta_support_.lower)) throw InvalidInput("regression: empty theta support");
        if (!(covariate_bounds_.upper > covariate_bounds_.lower)) throw InvalidInput("regression: empty covariate range");
    }

    static constexpr const char* id() { return "het-regression"; }
    std::size_t n() const noexcept { return n_; }
    std::size_t param_dim() const noexcept { return kRegressionDim; }
    std::size_t output_dim() const noexcept { return kRegressionDim; }

    std::vector<Interval> support() const { return std::vector<Interval>(kRegressionDim, theta_support_); }

    PriorSpec prior() const {
        return PriorSpec{std::vector<PriorCoordinate>(kRegressionDim, PriorCoordinate::continuous(theta_support_))};
    }

    auto sampler(const ParamPoint& phi) const {
        if (phi.size() != kRegressionDim) throw InvalidInput("regression: phi must have 4 entries");
        const Coefficients theta(phi[0], phi[1], phi[2], phi[3]);
        const std::size_t n = n_;
        const Interval bounds = covariate_bounds_;
        return [theta, n, bounds](Rng& rng) { return reg_sample(theta, n, rng, bounds); };
    }

    EstimatorTriple triple(const Dataset& d) const {
        const Coefficients ols = reg_t2_ols(d);
        const Coefficients wls = reg_t1_wls(d, ols);
        auto t1 = to_vector(wls);
        return {t1, to_vector(ols), t1};
    }

    std::vector<double> network_input(const EstimatorTriple& t) const { return t.t1; }

    std::vector<double> estimand(const ParamPoint& phi) const {
        if (phi.size() != kRegressionDim) throw InvalidInput("regression: phi must have 4 entries");
        return phi.vector();
    }

private:
    std::size_t n_;
    Interval theta_support_;
    Interval covariate_bounds_;
};

}  // namespace ensemble::models
