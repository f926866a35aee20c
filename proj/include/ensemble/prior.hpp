#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/rng.hpp"

namespace ensemble {

// One coordinate of the working prior: continuous uniform over an interval or
// discrete uniform over a finite set.
struct PriorCoordinate {
    enum class Kind { continuous, discrete };

    Kind kind = Kind::continuous;
    Interval range{};
    std::vector<double> values;

    static PriorCoordinate continuous(Interval range) {
        if (!(range.upper >= range.lower)) throw InvalidInput("prior interval must have upper >= lower");
        return {Kind::continuous, range, {}};
    }

    static PriorCoordinate discrete(std::vector<double> values) {
        if (values.empty()) throw InvalidInput("discrete prior needs at least one value");
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        return {Kind::discrete, Interval{*lo, *hi}, std::move(values)};
    }

    double draw(Rng& rng) const {
        if (kind == Kind::discrete) return values[rng.index(values.size())];
        return rng.uniform(range.lower, range.upper);
    }

    // Smallest interval containing every possible draw. Used for the network's
    // input map; a zero-width hull is widened so the map stays invertible.
    Interval hull() const {
        if (range.upper > range.lower) return range;
        return {range.lower - 0.5, range.upper + 0.5};
    }
};

struct PriorSpec {
    std::vector<PriorCoordinate> coordinates;

    std::size_t dim() const noexcept { return coordinates.size(); }

    std::vector<Interval> hulls() const {
        std::vector<Interval> out;
        for (const auto& c : coordinates) out.push_back(c.hull());
        return out;
    }
};

// M i.i.d. draws from the prior, deterministic in `seed`.
inline std::vector<ParamPoint> sample_prior(const PriorSpec& prior, std::size_t M, std::uint64_t seed) {
    if (M < 1) throw InvalidInput("sample_prior: M must be >= 1");
    if (prior.coordinates.empty()) throw InvalidInput("sample_prior: empty prior");
    Rng rng(seed);
    std::vector<ParamPoint> out;
    out.reserve(M);
    std::vector<double> v(prior.dim());
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = prior.coordinates[i].draw(rng);
        out.emplace_back(v);
    }
    return out;
}

}  // namespace ensemble
