#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ensemble/errors.hpp"
#include "ensemble/nn.hpp"

namespace ensemble::nn {

inline constexpr int kNetworkFormatVersion = 1;

// Network file layout:
//   {format_version, config:{input_dim, hidden_widths, dropout_rate, output_dim, activation},
//    input_affine_map:{lower:[...], upper:[...]},
//    layers:[{weights:[[...]], biases:[...]}]}
// nlohmann::json writes doubles in shortest round-trip form, so load(save(p)) == p bitwise.
inline nlohmann::json to_json(const NetworkParams& p) {
    using nlohmann::json;
    json cfg{{"input_dim", p.config.input_dim},
             {"hidden_widths", p.config.hidden_widths},
             {"dropout_rate", p.config.dropout_rate},
             {"output_dim", p.config.output_dim},
             {"activation", "relu"}};
    json lower = json::array(), upper = json::array();
    for (const auto& iv : p.input_map.domain) {
        lower.push_back(iv.lower);
        upper.push_back(iv.upper);
    }
    json layers = json::array();
    for (const auto& layer : p.layers) {
        json w = json::array();
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) row.push_back(layer.weights(i, j));
            w.push_back(std::move(row));
        }
        json b = json::array();
        for (Eigen::Index i = 0; i < layer.biases.size(); ++i) b.push_back(layer.biases(i));
        layers.push_back({{"weights", std::move(w)}, {"biases", std::move(b)}});
    }
    return {{"format_version", kNetworkFormatVersion},
            {"config", std::move(cfg)},
            {"input_affine_map", {{"lower", std::move(lower)}, {"upper", std::move(upper)}}},
            {"layers", std::move(layers)}};
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    return obj.at(key);
}

inline double number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

inline std::size_t count(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_unsigned()) throw ParseError(where + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

}  // namespace detail

inline NetworkParams from_json(const nlohmann::json& doc) {
    using detail::count;
    using detail::field;
    using detail::number;

    const int version = static_cast<int>(count(field(doc, "format_version", "network"), "format_version"));
    if (version != kNetworkFormatVersion) {
        throw ParseError("format_version: unsupported value " + std::to_string(version));
    }

    NetworkParams p;
    const auto& cfg = field(doc, "config", "network");
    p.config.input_dim = count(field(cfg, "input_dim", "config"), "config.input_dim");
    p.config.output_dim = count(field(cfg, "output_dim", "config"), "config.output_dim");
    p.config.dropout_rate = number(field(cfg, "dropout_rate", "config"), "config.dropout_rate");
    const auto& widths = field(cfg, "hidden_widths", "config");
    if (!widths.is_array()) throw ParseError("config.hidden_widths: expected an array");
    p.config.hidden_widths.clear();
    for (std::size_t i = 0; i < widths.size(); ++i) {
        p.config.hidden_widths.push_back(count(widths[i], "config.hidden_widths[" + std::to_string(i) + "]"));
    }
    if (cfg.contains("activation") && cfg.at("activation") != "relu") {
        throw ParseError("config.activation: only 'relu' is supported");
    }
    try {
        p.config.validate();
    } catch (const InvalidInput& e) {
        throw ParseError(std::string("config: ") + e.what());
    }

    const auto& map = field(doc, "input_affine_map", "network");
    const auto& lower = field(map, "lower", "input_affine_map");
    const auto& upper = field(map, "upper", "input_affine_map");
    if (!lower.is_array() || !upper.is_array() || lower.size() != p.config.input_dim ||
        upper.size() != p.config.input_dim) {
        throw ParseError("input_affine_map: lower/upper must be arrays of length input_dim = " +
                         std::to_string(p.config.input_dim));
    }
    for (std::size_t i = 0; i < p.config.input_dim; ++i) {
        const std::string where = "input_affine_map[" + std::to_string(i) + "]";
        p.input_map.domain.push_back({number(lower[i], where + ".lower"), number(upper[i], where + ".upper")});
    }

    const auto sizes = p.config.layer_sizes();
    const auto& layers = field(doc, "layers", "network");
    if (!layers.is_array() || layers.size() != sizes.size() - 1) {
        throw ParseError("layers: expected " + std::to_string(sizes.size() - 1) + " layers for the declared config");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string where = "layers[" + std::to_string(l) + "]";
        const auto& w = field(layers[l], "weights", where);
        const auto& b = field(layers[l], "biases", where);
        const auto rows = sizes[l + 1];
        const auto cols = sizes[l];
        if (!w.is_array() || w.size() != rows) {
            throw ParseError(where + ".weights: expected " + std::to_string(rows) + " rows, declared config says width " +
                             std::to_string(rows));
        }
        if (!b.is_array() || b.size() != rows) {
            throw ParseError(where + ".biases: expected " + std::to_string(rows) + " entries");
        }
        DenseLayer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)),
                         Eigen::VectorXd(static_cast<Eigen::Index>(rows))};
        for (std::size_t i = 0; i < rows; ++i) {
            const std::string rw = where + ".weights[" + std::to_string(i) + "]";
            if (!w[i].is_array() || w[i].size() != cols) {
                throw ParseError(rw + ": expected " + std::to_string(cols) + " columns");
            }
            for (std::size_t j = 0; j < cols; ++j) {
                layer.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    number(w[i][j], rw + "[" + std::to_string(j) + "]");
            }
            layer.biases(static_cast<Eigen::Index>(i)) = number(b[i], where + ".biases[" + std::to_string(i) + "]");
        }
        p.layers.push_back(std::move(layer));
    }
    try {
        p.validate();
    } catch (const InvalidInput& e) {
        throw ParseError(std::string("network: ") + e.what());
    }
    return p;
}

inline void save_params(const NetworkParams& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json(p).dump(1) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

inline NetworkParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        return from_json(doc);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace ensemble::nn
