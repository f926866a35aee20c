#pragma once

// Small fully connected ReLU network used to approximate the optimal
// combination weight as a function of the model parameters. Everything here
// is deterministic given the seeds: weight init, epoch shuffles and dropout
// masks all come from one ensemble::Rng stream.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/rng.hpp"

namespace ensemble::nn {

struct NetworkConfig {
    std::size_t input_dim = 1;
    std::vector<std::size_t> hidden_widths{40, 40};
    double dropout_rate = 0.0;
    std::size_t output_dim = 1;

    void validate() const {
        if (input_dim < 1) throw InvalidInput("network input_dim must be >= 1");
        if (output_dim < 1) throw InvalidInput("network output_dim must be >= 1");
        for (std::size_t w : hidden_widths) {
            if (w < 1) throw InvalidInput("hidden layer widths must be >= 1");
        }
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidInput("dropout_rate must lie in [0, 1)");
    }

    // Units per layer, input first, output last.
    std::vector<std::size_t> layer_sizes() const {
        std::vector<std::size_t> sizes{input_dim};
        sizes.insert(sizes.end(), hidden_widths.begin(), hidden_widths.end());
        sizes.push_back(output_dim);
        return sizes;
    }

    std::size_t parameter_count() const {
        const auto sizes = layer_sizes();
        std::size_t total = 0;
        for (std::size_t i = 1; i < sizes.size(); ++i) total += sizes[i] * sizes[i - 1] + sizes[i];
        return total;
    }

    std::string describe() const {
        std::string s = "[";
        for (std::size_t i = 0; i < hidden_widths.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(hidden_widths[i]);
        }
        return s + "]";
    }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// Maps each input coordinate affinely from its domain interval onto [-1, 1].
struct InputAffineMap {
    std::vector<Interval> domain;

    static InputAffineMap identity(std::size_t dim) {
        return InputAffineMap{std::vector<Interval>(dim, Interval{-1.0, 1.0})};
    }

    void validate(std::size_t dim) const {
        if (domain.size() != dim) throw InvalidInput("input map dimension does not match network input_dim");
        for (const auto& iv : domain) {
            if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper) || !(iv.upper > iv.lower)) {
                throw InvalidInput("input map interval must be finite with upper > lower");
            }
        }
    }

    double apply(std::size_t i, double x) const {
        const Interval& iv = domain[i];
        return (x - iv.midpoint()) * (2.0 / iv.width());
    }
};

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd biases;   // out
};

struct NetworkParams {
    NetworkConfig config;
    InputAffineMap input_map;
    std::vector<DenseLayer> layers;

    void validate() const {
        config.validate();
        input_map.validate(config.input_dim);
        const auto sizes = config.layer_sizes();
        if (layers.size() != sizes.size() - 1) throw InvalidInput("layer count does not match config");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& layer = layers[l];
            if (static_cast<std::size_t>(layer.weights.rows()) != sizes[l + 1] ||
                static_cast<std::size_t>(layer.weights.cols()) != sizes[l] ||
                static_cast<std::size_t>(layer.biases.size()) != sizes[l + 1]) {
                throw InvalidInput("layer " + std::to_string(l) + " shape does not match config");
            }
            if (!layer.weights.allFinite() || !layer.biases.allFinite()) {
                throw InvalidInput("layer " + std::to_string(l) + " has non-finite entries");
            }
        }
    }

    friend bool operator==(const NetworkParams& a, const NetworkParams& b) {
        if (!(a.config == b.config) || a.layers.size() != b.layers.size()) return false;
        if (a.input_map.domain.size() != b.input_map.domain.size()) return false;
        for (std::size_t i = 0; i < a.input_map.domain.size(); ++i) {
            if (a.input_map.domain[i].lower != b.input_map.domain[i].lower ||
                a.input_map.domain[i].upper != b.input_map.domain[i].upper) {
                return false;
            }
        }
        for (std::size_t l = 0; l < a.layers.size(); ++l) {
            if (a.layers[l].weights != b.layers[l].weights || a.layers[l].biases != b.layers[l].biases) return false;
        }
        return true;
    }
};

// Same shape as NetworkParams::layers.
using LayerTensors = std::vector<DenseLayer>;

inline LayerTensors zeros_like(const NetworkConfig& cfg) {
    const auto sizes = cfg.layer_sizes();
    LayerTensors out;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        const auto rows = static_cast<Eigen::Index>(sizes[l]);
        const auto cols = static_cast<Eigen::Index>(sizes[l - 1]);
        out.push_back({Eigen::MatrixXd::Zero(rows, cols), Eigen::VectorXd::Zero(rows)});
    }
    return out;
}

inline NetworkParams zero_network(const NetworkConfig& cfg, InputAffineMap map) {
    cfg.validate();
    map.validate(cfg.input_dim);
    return NetworkParams{cfg, std::move(map), zeros_like(cfg)};
}

// He initialization (variance 2 / fan_in) on hidden layers, variance 1 / fan_in
// on the linear output layer, zero biases.
inline NetworkParams initialize(const NetworkConfig& cfg, InputAffineMap map, Rng& rng) {
    NetworkParams p = zero_network(cfg, std::move(map));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& w = p.layers[l].weights;
        const bool output = l + 1 == p.layers.size();
        const double sd = std::sqrt((output ? 1.0 : 2.0) / static_cast<double>(w.cols()));
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = sd * rng.normal();
        }
    }
    return p;
}

// Inverted-dropout multipliers for every hidden layer: 0 for dropped units and
// 1 / (1 - p) for kept ones. Empty when the rate is zero.
using DropoutMasks = std::vector<Eigen::MatrixXd>;

inline DropoutMasks draw_masks(const NetworkConfig& cfg, Eigen::Index batch, Rng& rng) {
    DropoutMasks masks;
    if (cfg.dropout_rate == 0.0) return masks;
    const double keep_scale = 1.0 / (1.0 - cfg.dropout_rate);
    for (std::size_t width : cfg.hidden_widths) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(width), batch);
        for (Eigen::Index j = 0; j < batch; ++j) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                m(i, j) = rng.uniform() < cfg.dropout_rate ? 0.0 : keep_scale;
            }
        }
        masks.push_back(std::move(m));
    }
    return masks;
}

struct ForwardCache {
    std::vector<Eigen::MatrixXd> pre;          // hidden pre-activations
    std::vector<Eigen::MatrixXd> activations;  // inputs to each layer (mapped input first)
};

// Inputs arrive already mapped, one column per example.
inline Eigen::MatrixXd forward_mapped(const NetworkParams& p, const Eigen::MatrixXd& mapped,
                                      const DropoutMasks* masks = nullptr, ForwardCache* cache = nullptr) {
    if (cache) {
        cache->pre.clear();
        cache->activations.clear();
        cache->activations.push_back(mapped);
    }
    Eigen::MatrixXd a = mapped;
    const std::size_t hidden = p.layers.size() - 1;
    for (std::size_t l = 0; l < hidden; ++l) {
        Eigen::MatrixXd z = p.layers[l].weights * a;
        z.colwise() += p.layers[l].biases;
        a = z.cwiseMax(0.0);
        if (masks && !masks->empty()) a = a.cwiseProduct((*masks)[l]);
        if (cache) {
            cache->pre.push_back(std::move(z));
            cache->activations.push_back(a);
        }
    }
    Eigen::MatrixXd out = p.layers.back().weights * a;
    out.colwise() += p.layers.back().biases;
    return out;
}

inline Eigen::MatrixXd map_inputs(const NetworkParams& p, std::span<const std::vector<double>> rows) {
    const auto d = static_cast<Eigen::Index>(p.config.input_dim);
    Eigen::MatrixXd z(d, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[j].size() != p.config.input_dim) {
            throw InvalidInput("input has " + std::to_string(rows[j].size()) + " entries, network expects " +
                               std::to_string(p.config.input_dim));
        }
        for (Eigen::Index i = 0; i < d; ++i) {
            z(i, static_cast<Eigen::Index>(j)) = p.input_map.apply(static_cast<std::size_t>(i), rows[j][i]);
        }
    }
    return z;
}

enum class ForwardMode { inference, train };

// Network output for one input point. Train mode draws a dropout mask from
// `mask_seed`; inference mode ignores the seed.
inline std::vector<double> forward(const NetworkParams& p, std::span<const double> input,
                                   ForwardMode mode = ForwardMode::inference, std::uint64_t mask_seed = 0) {
    if (input.size() != p.config.input_dim) {
        throw InvalidInput("input has " + std::to_string(input.size()) + " entries, network expects " +
                           std::to_string(p.config.input_dim));
    }
    Eigen::MatrixXd z(static_cast<Eigen::Index>(input.size()), 1);
    for (std::size_t i = 0; i < input.size(); ++i) z(static_cast<Eigen::Index>(i), 0) = p.input_map.apply(i, input[i]);
    Eigen::MatrixXd out;
    if (mode == ForwardMode::train) {
        Rng rng(mask_seed);
        const DropoutMasks masks = draw_masks(p.config, 1, rng);
        out = forward_mapped(p, z, &masks);
    } else {
        out = forward_mapped(p, z);
    }
    return {out.data(), out.data() + out.size()};
}

inline std::vector<double> forward(const NetworkParams& p, const ParamPoint& input,
                                   ForwardMode mode = ForwardMode::inference, std::uint64_t mask_seed = 0) {
    return forward(p, input.values(), mode, mask_seed);
}

inline double mse_loss(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size()) throw InvalidInput("mse_loss: length mismatch");
    if (predictions.empty()) throw InvalidInput("mse_loss: empty input");
    CompensatedSum s;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - labels[i];
        s.add(e * e);
    }
    return s.value() / static_cast<double>(predictions.size());
}

// One training row: raw (unmapped) input and its target vector.
struct Example {
    std::vector<double> input;
    std::vector<double> target;
};

struct Gradients {
    LayerTensors layers;
    double loss = 0.0;  // batch MSE at the evaluated parameters
};

// Gradient of the batch MSE (mean over examples and output coordinates) for
// mapped inputs/targets stored column-wise.
inline Gradients backward_mapped(const NetworkParams& p, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                                 const DropoutMasks* masks = nullptr) {
    ForwardCache cache;
    const Eigen::MatrixXd out = forward_mapped(p, inputs, masks, &cache);
    const Eigen::MatrixXd err = out - targets;
    const double scale = 1.0 / static_cast<double>(err.size());

    Gradients g{zeros_like(p.config), err.squaredNorm() * scale};
    Eigen::MatrixXd delta = (2.0 * scale) * err;
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        g.layers[l].weights.noalias() = delta * cache.activations[l].transpose();
        g.layers[l].biases = delta.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd back = p.layers[l].weights.transpose() * delta;
        if (masks && !masks->empty()) back = back.cwiseProduct((*masks)[l - 1]);
        const Eigen::MatrixXd& pre = cache.pre[l - 1];
        delta = back.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    }
    return g;
}

inline Eigen::MatrixXd stack_targets(std::span<const Example> batch, std::size_t output_dim) {
    Eigen::MatrixXd y(static_cast<Eigen::Index>(output_dim), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t j = 0; j < batch.size(); ++j) {
        if (batch[j].target.size() != output_dim) throw InvalidInput("target size does not match network output_dim");
        for (std::size_t i = 0; i < output_dim; ++i) {
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = batch[j].target[i];
        }
    }
    return y;
}

inline Eigen::MatrixXd map_examples(const NetworkParams& p, std::span<const Example> batch) {
    std::vector<std::vector<double>> rows;
    rows.reserve(batch.size());
    for (const auto& e : batch) rows.push_back(e.input);
    return map_inputs(p, rows);
}

inline Gradients backward(const NetworkParams& p, std::span<const Example> batch, const DropoutMasks* masks = nullptr) {
    if (batch.empty()) throw InvalidInput("backward: empty batch");
    return backward_mapped(p, map_examples(p, batch), stack_targets(batch, p.config.output_dim), masks);
}

struct TrainConfig {
    std::size_t epochs = 1000;
    std::size_t batch_size = 100;
    double learning_rate = 1e-3;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    // Default dropout for candidate pools built from this config; training
    // itself uses NetworkConfig::dropout_rate.
    double dropout_rate = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 1 || batch_size < 1) throw InvalidInput("epochs and batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
        if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) throw InvalidInput("rmsprop_decay must lie in (0, 1)");
        if (!(rmsprop_epsilon > 0.0)) throw InvalidInput("rmsprop_epsilon must be positive");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidInput("dropout_rate must lie in [0, 1)");
    }
};

struct RmsPropState {
    LayerTensors mean_square;

    static RmsPropState for_config(const NetworkConfig& cfg) { return {zeros_like(cfg)}; }
};

// state <- decay * state + (1 - decay) * g^2
// param <- param - lr * g / sqrt(state + eps)
inline void rmsprop_step(RmsPropState& state, LayerTensors& params, const LayerTensors& grads, double learning_rate,
                         double decay, double epsilon) {
    for (std::size_t l = 0; l < params.size(); ++l) {
        auto update = [&](auto& value, auto& ms, const auto& g) {
            ms.array() = decay * ms.array() + (1.0 - decay) * g.array().square();
            value.array() -= learning_rate * g.array() / (ms.array() + epsilon).sqrt();
        };
        update(params[l].weights, state.mean_square[l].weights, grads[l].weights);
        update(params[l].biases, state.mean_square[l].biases, grads[l].biases);
    }
}

inline void rmsprop_step(RmsPropState& state, NetworkParams& params, const Gradients& grads, const TrainConfig& cfg) {
    rmsprop_step(state, params.layers, grads.layers, cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon);
}

struct TrainHistory {
    // Inference-mode MSE over the full training set after each epoch.
    std::vector<double> train_mse;
    // Set when a validation set was supplied.
    std::optional<double> validation_mse;
};

struct TrainResult {
    NetworkParams params;
    TrainHistory history;
};

inline double evaluate_mse(const NetworkParams& p, std::span<const Example> data) {
    if (data.empty()) throw InvalidInput("evaluate_mse: empty dataset");
    const Eigen::MatrixXd out = forward_mapped(p, map_examples(p, data));
    const Eigen::MatrixXd y = stack_targets(data, p.config.output_dim);
    return (out - y).squaredNorm() / static_cast<double>(y.size());
}

// Axis-aligned bounding box of the inputs; used when no model support is known.
inline InputAffineMap bounding_map(std::span<const Example> data) {
    if (data.empty()) throw InvalidInput("bounding_map: empty dataset");
    const std::size_t d = data.front().input.size();
    InputAffineMap map;
    map.domain.resize(d);
    for (std::size_t i = 0; i < d; ++i) map.domain[i] = {data.front().input[i], data.front().input[i]};
    for (const auto& e : data) {
        for (std::size_t i = 0; i < d; ++i) {
            map.domain[i].lower = std::min(map.domain[i].lower, e.input[i]);
            map.domain[i].upper = std::max(map.domain[i].upper, e.input[i]);
        }
    }
    for (auto& iv : map.domain) {
        if (!(iv.upper > iv.lower)) {
            iv.lower -= 0.5;
            iv.upper += 0.5;
        }
    }
    return map;
}

// Minibatch RMSProp on the MSE objective. Deterministic given the data order
// and cfg.seed.
inline TrainResult train(std::span<const Example> data, std::span<const Example> validation,
                         const NetworkConfig& net_cfg, const TrainConfig& cfg, InputAffineMap map) {
    net_cfg.validate();
    cfg.validate();
    if (data.empty()) throw InvalidInput("train: empty dataset");
    for (const auto& e : data) {
        if (e.input.size() != net_cfg.input_dim || e.target.size() != net_cfg.output_dim) {
            throw InvalidInput("train: example shape does not match network config");
        }
    }

    Rng rng(cfg.seed);
    TrainResult result{initialize(net_cfg, std::move(map), rng), {}};
    NetworkParams& params = result.params;
    RmsPropState state = RmsPropState::for_config(net_cfg);

    const Eigen::MatrixXd inputs = map_examples(params, data);
    const Eigen::MatrixXd targets = stack_targets(data, net_cfg.output_dim);
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto d = inputs.rows();
    const auto out_dim = targets.rows();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    result.history.train_mse.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += static_cast<Eigen::Index>(cfg.batch_size)) {
            const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(cfg.batch_size), n - start);
            Eigen::MatrixXd xb(d, len), yb(out_dim, len);
            for (Eigen::Index j = 0; j < len; ++j) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + j)];
                xb.col(j) = inputs.col(src);
                yb.col(j) = targets.col(src);
            }
            const DropoutMasks masks = draw_masks(net_cfg, len, rng);
            const Gradients g = backward_mapped(params, xb, yb, &masks);
            if (!std::isfinite(g.loss)) throw DivergedTraining(epoch + 1, "non-finite batch loss");
            rmsprop_step(state, params, g, cfg);
        }
        const double mse = (forward_mapped(params, inputs) - targets).squaredNorm() / static_cast<double>(targets.size());
        if (!std::isfinite(mse)) throw DivergedTraining(epoch + 1, "non-finite training MSE");
        result.history.train_mse.push_back(mse);
    }
    if (!validation.empty()) result.history.validation_mse = evaluate_mse(params, validation);
    return result;
}

}  // namespace ensemble::nn
