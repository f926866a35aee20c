#include <cmath>
#include <limits>
#include <vector>

#include "catch_amalgamated.hpp"

#include "ensemble/core.hpp"
#include "ensemble/models/scale_uniform.hpp"
#include "ensemble/rng.hpp"
#include "oracles/scale_uniform_moments.hpp"

using namespace ensemble;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<EstimatePair> scale_uniform_pairs(double theta, double k, std::size_t n, std::size_t N, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EstimatePair> out;
    out.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto x = models::su_sample(theta, k, n, rng);
        out.push_back({models::su_t1_rao_blackwell(x), models::su_t2_corrected_mle(x, k)});
    }
    return out;
}

double sample_variance(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= v.size();
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

}  // namespace

TEST_CASE("combine returns the weighted mix", "[core][combine]") {
    CHECK(combine({1.0, 2.0}, 1.0) == 1.0);
    CHECK(combine({1.0, 2.0}, 0.0) == 2.0);
    CHECK_THAT(combine({0.5, 0.3}, 0.25), WithinAbs(0.35, 1e-15));
    // weights outside [0, 1] are legal
    CHECK_THAT(combine({1.0, 2.0}, 1.5), WithinAbs(0.5, 1e-15));
    CHECK_THAT(combine({1.0, 2.0}, -0.5), WithinAbs(2.5, 1e-15));
}

TEST_CASE("combine at w = 1 and w = 0 is bitwise T1 and T2", "[core][combine][property]") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-1e3, 1e3), b = rng.uniform(-1e-3, 1e-3) * std::exp(rng.uniform(0, 20));
        CHECK(combine({a, b}, 1.0) == a);
        CHECK(combine({a, b}, 0.0) == b);
    }
}

TEST_CASE("combine rejects non-finite input", "[core][combine]") {
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(combine({1.0, 2.0}, inf), InvalidInput);
    CHECK_THROWS_AS(combine({1.0, 2.0}, nan), InvalidInput);
    CHECK_THROWS_AS(combine({nan, 2.0}, 0.5), InvalidInput);
    CHECK_THROWS_AS(combine({1.0, -inf}, 0.5), InvalidInput);
}

TEST_CASE("empirical_w_opt small samples", "[core][wopt]") {
    const std::vector<EstimatePair> a{{1, 2}, {2, 1}};
    CHECK_THAT(empirical_w_opt(a), WithinAbs(0.5, 1e-15));
    const std::vector<EstimatePair> b{{0, 1}, {0, 3}};
    CHECK_THAT(empirical_w_opt(b), WithinAbs(1.0, 1e-15));
}

TEST_CASE("empirical_w_opt error paths", "[core][wopt]") {
    const std::vector<EstimatePair> one{{1, 2}};
    CHECK_THROWS_AS(empirical_w_opt(one), InvalidInput);
    const std::vector<EstimatePair> same{{1, 1}, {2, 2}, {3, 3}};
    CHECK_THROWS_AS(empirical_w_opt(same), DegeneratePair);
    const std::vector<EstimatePair> tiny{{1, 1 + 1e-7}, {2, 2 - 1e-7}};  // sum of squares 2e-14
    CHECK_THROWS_AS(empirical_w_opt(tiny), DegeneratePair);
    const std::vector<EstimatePair> bad{{1, 2}, {std::numeric_limits<double>::quiet_NaN(), 1}};
    CHECK_THROWS_AS(empirical_w_opt(bad), InvalidInput);
}

TEST_CASE("empirical_w_opt is invariant to a common rescaling", "[core][wopt][property]") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<EstimatePair> pairs;
        for (int i = 0; i < 500; ++i) {
            const double z = rng.normal();
            pairs.push_back({z + 0.3 * rng.normal(), z + 0.8 * rng.normal()});
        }
        const double w = empirical_w_opt(pairs);
        for (double c : {-3.0, 1e-4, 7.5, 1e5}) {
            auto scaled = pairs;
            for (auto& p : scaled) p = {c * p.t1, c * p.t2};
            CHECK_THAT(empirical_w_opt(scaled), WithinRel(w, 1e-12));
        }
    }
}

TEST_CASE("empirical_w_opt minimizes the sample second moment of the combination", "[core][wopt][property]") {
    // With raw moments the weight minimizes sum U^2; for centered samples that is the variance.
    Rng rng(5);
    std::vector<EstimatePair> pairs;
    for (int i = 0; i < 2000; ++i) {
        const double z = rng.normal();
        pairs.push_back({z + 0.5 * rng.normal(), z + rng.normal()});
    }
    double m1 = 0, m2 = 0;
    for (const auto& p : pairs) m1 += p.t1, m2 += p.t2;
    m1 /= pairs.size(), m2 /= pairs.size();
    for (auto& p : pairs) p = {p.t1 - m1, p.t2 - m2};

    const double w_star = empirical_w_opt(pairs);
    auto spread = [&](double w) {
        std::vector<double> u;
        for (const auto& p : pairs) u.push_back(combine(p, w));
        return sample_variance(u);
    };
    const double best = spread(w_star);
    for (int i = 0; i <= 100; ++i) {
        const double w = -1.0 + 3.0 * i / 100.0;
        CHECK(best <= spread(w) * (1 + 1e-12));
    }
}

TEST_CASE("centered weight minimizes the sample variance even with a biased component", "[core][wopt][property]") {
    Rng rng(8);
    std::vector<EstimatePair> pairs;
    for (int i = 0; i < 5000; ++i) {
        const double z = rng.normal();
        pairs.push_back({1.0 + z + 0.5 * rng.normal() - 0.2, 1.0 + z + rng.normal()});  // T1 biased by -0.2
    }
    const double w_c = empirical_w_opt_centered(pairs);
    auto spread = [&](double w) {
        std::vector<double> u;
        for (const auto& p : pairs) u.push_back(combine(p, w));
        return sample_variance(u);
    };
    const double best = spread(w_c);
    for (int i = 0; i <= 100; ++i) CHECK(best <= spread(-1.0 + 3.0 * i / 100.0) * (1 + 1e-12));

    // Shifting T1 by a constant leaves the centered weight unchanged, but not the raw one.
    auto shifted = pairs;
    for (auto& p : shifted) p.t1 += 0.5;
    CHECK_THAT(empirical_w_opt_centered(shifted), WithinAbs(w_c, 1e-9));
    CHECK(std::abs(empirical_w_opt(shifted) - empirical_w_opt(pairs)) > 1e-3);
}

TEST_CASE("centered and raw weights agree on the small examples", "[core][wopt]") {
    const std::vector<EstimatePair> a{{1, 2}, {2, 1}};
    CHECK_THAT(empirical_w_opt_centered(a), WithinAbs(0.5, 1e-15));
    const std::vector<EstimatePair> b{{0, 1}, {0, 3}};
    CHECK_THAT(empirical_w_opt_centered(b), WithinAbs(1.0, 1e-15));
    const std::vector<EstimatePair> shift{{1, 2}, {2, 3}, {5, 6}};  // T2 - T1 constant
    CHECK_THROWS_AS(empirical_w_opt_centered(shift), DegeneratePair);
}

TEST_CASE("WeightAccumulator merge matches a single pass", "[core][wopt]") {
    Rng rng(21);
    std::vector<EstimatePair> pairs;
    for (int i = 0; i < 3001; ++i) pairs.push_back({rng.normal(), 0.4 * rng.normal() + 0.1});
    WeightAccumulator all, a, b, c;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        all.add(pairs[i]);
        (i < 1000 ? a : i < 2500 ? b : c).add(pairs[i]);
    }
    a.merge(b);
    a.merge(c);
    CHECK(a.count() == all.count());
    CHECK_THAT(a.estimate().value, WithinRel(all.estimate().value, 1e-12));
    CHECK_THAT(a.estimate().standard_error, WithinRel(all.estimate().standard_error, 1e-9));
    CHECK_THAT(a.centered_estimate(), WithinRel(all.centered_estimate(), 1e-12));
}

TEST_CASE("scale-uniform weight matches the order-statistic oracle", "[core][wopt][oracle]") {
    const double theta = 1.0, k = 0.9;
    const int n = 10;
    const auto pairs = scale_uniform_pairs(theta, k, n, 100000, 42);
    const auto est = empirical_w_opt_with_error(pairs);
    const double exact = oracle::scale_uniform_moments(theta, k, n).w_opt();
    INFO("estimate " << est.value << " +- " << est.standard_error << ", exact " << exact);
    CHECK(std::abs(est.value - exact) <= 3.0 * est.standard_error);
}

TEST_CASE("variance_reduction", "[core][lambda]") {
    CHECK(variance_reduction(0.3, 0.3, 2.0) == 0.0);
    CHECK_THAT(variance_reduction(0.0, 0.5, 2.0), WithinAbs(0.5, 1e-15));
    CHECK_THROWS_AS(variance_reduction(0.0, 0.5, 0.0), DegeneratePair);
    CHECK_THROWS_AS(variance_reduction(0.0, 0.5, -1.0), DegeneratePair);

    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double w = rng.uniform(-5, 5), w_opt = rng.uniform(-5, 5), v = rng.uniform(1e-6, 10);
        const double lam = variance_reduction(w, w_opt, v);
        CHECK(lam >= 0.0);
        CHECK((lam == 0.0) == (w == w_opt));
        CHECK(variance_reduction(w_opt, w_opt, v) == 0.0);
    }
}

TEST_CASE("variance_reduction matches the simulated variance gap", "[core][lambda][oracle]") {
    // n = 2, k = 0.1: Lambda(0) = var(T2) - var(U_opt)
    const double theta = 1.0, k = 0.1;
    const auto m = oracle::scale_uniform_moments(theta, k, 2);
    const double w_opt = m.w_opt();
    const double lambda0 = variance_reduction(0.0, w_opt, m.second_moment_diff());
    CHECK_THAT(lambda0, WithinRel(m.var_t2 - m.var_u_opt(), 1e-12));

    const auto pairs = scale_uniform_pairs(theta, k, 2, 1000000, 7);
    std::vector<double> t2, u;
    t2.reserve(pairs.size());
    u.reserve(pairs.size());
    for (const auto& p : pairs) {
        t2.push_back(p.t2);
        u.push_back(combine(p, w_opt));
    }
    const double simulated = sample_variance(t2) - sample_variance(u);
    INFO("Lambda(0) " << lambda0 << " simulated " << simulated);
    CHECK_THAT(simulated, WithinRel(lambda0, 0.02));
}

TEST_CASE("PairMoments", "[core][moments]") {
    Rng rng(4);
    std::vector<EstimatePair> pairs;
    for (int i = 0; i < 1000; ++i) pairs.push_back({rng.normal() + 1, rng.normal() + 1});
    const auto m = PairMoments::from_pairs(pairs);
    CHECK(m.n_samples == 1000);
    CHECK_THAT(m.w_opt(), WithinRel(empirical_w_opt(pairs), 1e-10));
    CHECK_THROWS_AS((PairMoments{1.0, 1.0, 1.5, 10}.validate()), InvalidInput);
    CHECK_THROWS_AS((PairMoments{-1.0, 1.0, 0.0, 10}.validate()), InvalidInput);
    CHECK_NOTHROW((PairMoments{1.0, 4.0, 2.0, 10}.validate()));
    CHECK_THROWS_AS((PairMoments{1.0, 1.0, 1.0, 10}.w_opt()), DegeneratePair);
}

TEST_CASE("ParamPoint validation", "[core][param]") {
    CHECK_THROWS_AS(ParamPoint(std::vector<double>{}), InvalidInput);
    CHECK_THROWS_AS((ParamPoint{1.0, std::numeric_limits<double>::infinity()}), InvalidInput);
    const std::vector<Interval> support{{0.2, 10.0}, {0.0, 1.0}};
    CHECK_NOTHROW(ParamPoint({1.0, 0.9}, support));
    CHECK_NOTHROW(ParamPoint({0.2, 1.0}, support));
    CHECK_THROWS_AS(ParamPoint({0.1, 0.9}, support), InvalidInput);
    CHECK_THROWS_AS(ParamPoint({1.0}, support), InvalidInput);
    const ParamPoint p{1.0, 2.0, 3.0};
    CHECK(p.size() == 3);
    CHECK(p[2] == 3.0);
}

TEST_CASE("CompensatedSum keeps small terms", "[core][sum]") {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1000.0);
}
