#pragma once

// Training data for the weight network: parameter points drawn from the
// working prior, each labeled with a Monte Carlo estimate of the optimal
// combination weight at that point.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/models/model.hpp"
#include "ensemble/nn.hpp"
#include "ensemble/parallel.hpp"
#include "ensemble/prior.hpp"
#include "ensemble/rng.hpp"

namespace ensemble {

struct LabeledExample {
    ParamPoint phi;
    std::vector<double> label;  // one weight per estimand coordinate
    std::size_t n_mc = 0;
    std::uint64_t seed = 0;

    nn::Example to_example() const { return {phi.vector(), label}; }
};

inline std::vector<nn::Example> to_examples(std::span<const LabeledExample> data) {
    std::vector<nn::Example> out;
    out.reserve(data.size());
    for (const auto& e : data) out.push_back(e.to_example());
    return out;
}

inline constexpr std::size_t kMinMonteCarloSamples = 100;

// How a label is formed from the N simulated (T1, T2) pairs.
//   raw_moments: sum (T2 - T1) T2 / sum (T1 - T2)^2
//   centered:    cov(T2 - T1, T2) / var(T2 - T1), the sample-variance minimizer
enum class LabelRule { raw_moments, centered };

inline const char* to_string(LabelRule r) { return r == LabelRule::centered ? "centered" : "raw-moments"; }

inline LabelRule parse_label_rule(const std::string& s) {
    if (s == "raw-moments" || s == "raw") return LabelRule::raw_moments;
    if (s == "centered") return LabelRule::centered;
    throw InvalidInput("unknown label rule '" + s + "' (expected raw-moments or centered)");
}

// Per-coordinate Monte Carlo optimal weight at phi, from N datasets drawn with
// `seed`. The same N datasets serve every coordinate.
template <models::EnsembleModel Model>
std::vector<WeightAccumulator> simulate_pairs(const Model& model, const ParamPoint& phi, std::size_t N,
                                              std::uint64_t seed) {
    if (N < kMinMonteCarloSamples) throw InvalidInput("gen_label: N must be >= 100");
    Rng rng(seed);
    const auto sampler = model.sampler(phi);
    std::vector<WeightAccumulator> acc(model.output_dim());
    for (std::size_t i = 0; i < N; ++i) {
        const EstimatorTriple t = model.triple(sampler(rng));
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j].add({t.t1[j], t.t2[j]});
    }
    return acc;
}

// Raw-moment label with its Monte Carlo standard error, per coordinate.
template <models::EnsembleModel Model>
std::vector<WeightEstimate> gen_label_with_error(const Model& model, const ParamPoint& phi, std::size_t N,
                                                 std::uint64_t seed) {
    std::vector<WeightEstimate> out;
    for (const auto& a : simulate_pairs(model, phi, N, seed)) out.push_back(a.estimate());
    return out;
}

template <models::EnsembleModel Model>
std::vector<double> gen_label(const Model& model, const ParamPoint& phi, std::size_t N, std::uint64_t seed,
                              LabelRule rule = LabelRule::raw_moments) {
    std::vector<double> out;
    for (const auto& a : simulate_pairs(model, phi, N, seed)) {
        out.push_back(rule == LabelRule::centered ? a.centered_estimate() : a.estimate().value);
    }
    return out;
}

// Seed streams used by build_dataset.
inline std::uint64_t prior_seed(std::uint64_t base) noexcept { return derive_seed(base, ~std::uint64_t{0}); }
inline std::uint64_t label_seed(std::uint64_t base, std::size_t index) noexcept { return derive_seed(base, index); }

template <models::EnsembleModel Model>
std::vector<LabeledExample> build_dataset(const Model& model, const PriorSpec& prior, std::size_t M, std::size_t N,
                                          std::uint64_t seed, std::size_t threads = 1,
                                          LabelRule rule = LabelRule::raw_moments) {
    if (N < kMinMonteCarloSamples) throw InvalidInput("build_dataset: N must be >= 100");
    if (prior.dim() != model.param_dim()) throw InvalidInput("build_dataset: prior dimension does not match model");
    const std::vector<ParamPoint> phis = sample_prior(prior, M, prior_seed(seed));

    std::vector<LabeledExample> out(M);
    std::vector<std::string> failures(M);
    parallel_for(M, threads, [&](std::size_t m) {
        const std::uint64_t s = label_seed(seed, m);
        try {
            out[m] = LabeledExample{phis[m], gen_label(model, phis[m], N, s, rule), N, s};
        } catch (const Error& e) {
            failures[m] = e.what();
        }
    });

    std::ostringstream msg;
    std::size_t failed = 0;
    for (std::size_t m = 0; m < M; ++m) {
        if (failures[m].empty()) continue;
        if (failed++ < 20) {
            msg << "\n  example " << m << " phi=(";
            for (std::size_t i = 0; i < phis[m].size(); ++i) msg << (i ? "," : "") << phis[m][i];
            msg << "): " << failures[m];
        }
    }
    if (failed > 0) {
        throw LabelGenerationFailed(std::to_string(failed) + " of " + std::to_string(M) + " labels failed" + msg.str());
    }
    return out;
}

// CSV: phi_1,...,phi_d,label_1,...,label_p,n_mc,seed. Values are written with
// 17 significant digits so they read back exactly.
inline void write_dataset_csv(std::ostream& out, std::span<const LabeledExample> data) {
    if (data.empty()) throw InvalidInput("write_dataset_csv: empty dataset");
    const std::size_t d = data.front().phi.size();
    const std::size_t p = data.front().label.size();
    for (std::size_t i = 0; i < d; ++i) out << "phi_" << i + 1 << ',';
    for (std::size_t i = 0; i < p; ++i) out << "label_" << i + 1 << ',';
    out << "n_mc,seed\n";
    char buf[40];
    for (const auto& e : data) {
        if (e.phi.size() != d || e.label.size() != p) throw InvalidInput("write_dataset_csv: ragged dataset");
        for (double v : e.phi.values()) {
            std::snprintf(buf, sizeof buf, "%.17g,", v);
            out << buf;
        }
        for (double v : e.label) {
            std::snprintf(buf, sizeof buf, "%.17g,", v);
            out << buf;
        }
        out << e.n_mc << ',' << e.seed << '\n';
    }
}

inline void write_dataset_csv(const std::filesystem::path& path, std::span<const LabeledExample> data) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_dataset_csv(out, data);
    if (!out) throw IoError("failed writing " + path.string());
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double(const std::string& s, std::size_t line, std::size_t column) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ParseError("line " + std::to_string(line) + ", field " + std::to_string(column + 1) +
                         ": not a number: '" + s + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(const std::string& s, std::size_t line, std::size_t column) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || end != s.c_str() + s.size()) {
        throw ParseError("line " + std::to_string(line) + ", field " + std::to_string(column + 1) +
                         ": not a non-negative integer: '" + s + "'");
    }
    return v;
}

}  // namespace detail

inline std::vector<LabeledExample> read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header");
    const auto header = detail::split_csv_line(line);
    std::size_t d = 0, p = 0;
    while (d < header.size() && header[d] == "phi_" + std::to_string(d + 1)) ++d;
    while (d + p < header.size() && header[d + p] == "label_" + std::to_string(p + 1)) ++p;
    if (d == 0 || p == 0 || header.size() != d + p + 2 || header[d + p] != "n_mc" || header[d + p + 1] != "seed") {
        throw ParseError("line 1: header must be phi_1..phi_d,label_1..label_p,n_mc,seed");
    }
    std::vector<LabeledExample> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != header.size()) {
            throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                             " fields, found " + std::to_string(f.size()));
        }
        std::vector<double> phi, label;
        for (std::size_t i = 0; i < d; ++i) phi.push_back(detail::parse_double(f[i], lineno, i));
        for (std::size_t i = 0; i < p; ++i) label.push_back(detail::parse_double(f[d + i], lineno, d + i));
        LabeledExample e;
        try {
            e.phi = ParamPoint(std::move(phi));
        } catch (const InvalidInput& err) {
            throw ParseError("line " + std::to_string(lineno) + ": " + err.what());
        }
        e.label = std::move(label);
        e.n_mc = detail::parse_uint(f[d + p], lineno, d + p);
        e.seed = detail::parse_uint(f[d + p + 1], lineno, d + p + 1);
        for (double v : e.label) {
            if (!std::isfinite(v)) throw ParseError("line " + std::to_string(lineno) + ": non-finite label");
        }
        out.push_back(std::move(e));
    }
    if (out.empty()) throw ParseError("dataset has no rows");
    return out;
}

inline std::vector<LabeledExample> read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return read_dataset_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace ensemble
