#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/models/model.hpp"
#include "ensemble/nn.hpp"

namespace ensemble {

struct NetworkInput {
    ParamPoint phi;
    bool clamped = false;  // some coordinate was pulled back onto the network's domain
};

// Data-derived network input, clamped onto the domain the network was trained on.
template <models::EnsembleModel Model>
NetworkInput network_input(const EstimatorTriple& triple, const Model& model, const nn::NetworkParams& params) {
    std::vector<double> raw = model.network_input(triple);
    if (raw.size() != params.config.input_dim) {
        throw InvalidInput("network input has " + std::to_string(raw.size()) + " entries, network expects " +
                           std::to_string(params.config.input_dim));
    }
    NetworkInput out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double c = params.input_map.domain[i].clamp(raw[i]);
        if (c != raw[i]) out.clamped = true;
        raw[i] = c;
    }
    out.phi = ParamPoint(std::move(raw));
    return out;
}

struct EnsembleEstimate {
    std::vector<double> value;
    std::vector<double> w_used;
    EstimatorTriple triple;
    std::string network_id;
    bool input_clamped = false;
};

// U = w T1 + (1 - w) T2 with w read off the network at the data-derived input.
// Only observed data reach the network; the true parameter never does.
template <models::EnsembleModel Model>
EnsembleEstimate estimate_from_triple(const Model& model, EstimatorTriple triple, const nn::NetworkParams& params,
                                      std::string network_id = {}) {
    if (params.config.input_dim != model.param_dim()) throw InvalidInput("network input_dim does not match model");
    if (params.config.output_dim != model.output_dim()) throw InvalidInput("network output_dim does not match model");
    EnsembleEstimate out;
    out.triple = std::move(triple);
    const NetworkInput input = network_input(out.triple, model, params);
    out.input_clamped = input.clamped;
    out.w_used = nn::forward(params, input.phi);
    out.value.resize(out.w_used.size());
    for (std::size_t j = 0; j < out.value.size(); ++j) {
        out.value[j] = combine({out.triple.t1[j], out.triple.t2[j]}, out.w_used[j]);
    }
    out.network_id = std::move(network_id);
    return out;
}

template <models::EnsembleModel Model>
EnsembleEstimate estimate(const Model& model, const typename Model::Dataset& data, const nn::NetworkParams& params,
                          std::string network_id = {}) {
    return estimate_from_triple(model, model.triple(data), params, std::move(network_id));
}

inline nlohmann::json to_json(const EnsembleEstimate& e) {
    return {{"value", e.value},
            {"w_used", e.w_used},
            {"t1", e.triple.t1},
            {"t2", e.triple.t2},
            {"omega_hat", e.triple.omega_hat},
            {"network_id", e.network_id},
            {"input_clamped", e.input_clamped}};
}

}  // namespace ensemble
