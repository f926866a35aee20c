#pragma once

#include <concepts>
#include <cstddef>
#include <vector>

#include "ensemble/core.hpp"
#include "ensemble/prior.hpp"
#include "ensemble/rng.hpp"

namespace ensemble::models {

// What the label factory, the estimation pipeline and the simulation harness
// need from a statistical model.
//   sampler(phi)(rng) -> Dataset    draw one dataset at phi
//   triple(data)                   (T1, T2, omega-hat) from observed data
//   network_input(triple)          data-derived stand-in for phi
//   estimand(phi)                  true theta (scalar or vector)
template <class M>
concept EnsembleModel = requires(const M& m, const ParamPoint& phi, const typename M::Dataset& data,
                                 const EstimatorTriple& t, Rng& rng) {
    { m.param_dim() } -> std::convertible_to<std::size_t>;
    { m.output_dim() } -> std::convertible_to<std::size_t>;
    { m.support() } -> std::same_as<std::vector<Interval>>;
    { m.prior() } -> std::same_as<PriorSpec>;
    { m.sampler(phi)(rng) } -> std::same_as<typename M::Dataset>;
    { m.triple(data) } -> std::same_as<EstimatorTriple>;
    { m.network_input(t) } -> std::same_as<std::vector<double>>;
    { m.estimand(phi) } -> std::same_as<std::vector<double>>;
};

}  // namespace ensemble::models
