#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ensemble/errors.hpp"
#include "ensemble/nn.hpp"
#include "ensemble/parallel.hpp"
#include "ensemble/rng.hpp"

namespace ensemble {

struct CandidatePool {
    std::vector<nn::NetworkConfig> candidates;

    // Two and three hidden layers of 40 or 60 units.
    static CandidatePool standard(std::size_t input_dim, std::size_t output_dim, double dropout_rate) {
        CandidatePool pool;
        for (const auto& widths : std::vector<std::vector<std::size_t>>{{40, 40}, {60, 60}, {40, 40, 40}, {60, 60, 60}}) {
            pool.candidates.push_back({input_dim, widths, dropout_rate, output_dim});
        }
        return pool;
    }

    void validate() const {
        if (candidates.empty()) throw InvalidInput("candidate pool is empty");
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            candidates[i].validate();
            for (std::size_t j = 0; j < i; ++j) {
                if (candidates[i] == candidates[j]) throw InvalidInput("candidate pool has duplicate configs");
            }
        }
    }
};

struct CandidateResult {
    nn::NetworkConfig config;
    std::uint64_t seed = 0;
    double train_mse = std::numeric_limits<double>::quiet_NaN();
    double validation_mse = std::numeric_limits<double>::quiet_NaN();
    bool diverged = false;
    std::string error;
};

struct SelectionReport {
    std::vector<CandidateResult> candidates;
    std::size_t chosen = 0;
    std::uint64_t split_seed = 0;
    std::size_t train_size = 0;
    std::size_t validation_size = 0;

    const nn::NetworkConfig& chosen_config() const { return candidates.at(chosen).config; }
};

// Random 80/20 partition: floor(0.8 n) training rows, the rest validation.
template <class T>
std::pair<std::vector<T>, std::vector<T>> split_80_20(std::span<const T> data, std::uint64_t seed) {
    if (data.size() < 5) throw InvalidInput("split_80_20: need at least 5 rows");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    const std::size_t n_train = data.size() * 4 / 5;
    std::pair<std::vector<T>, std::vector<T>> out;
    out.first.reserve(n_train);
    out.second.reserve(data.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? out.first : out.second).push_back(data[order[i]]);
    }
    return out;
}

inline constexpr std::uint64_t kSplitStream = 0x53504c4954ULL;

inline std::uint64_t split_seed_for(const nn::TrainConfig& cfg) noexcept { return derive_seed(cfg.seed, kSplitStream); }
inline std::uint64_t candidate_seed(const nn::TrainConfig& cfg, std::size_t index) noexcept {
    return derive_seed(cfg.seed, index);
}

// Index of the smallest validation MSE among non-diverged candidates. Ties go
// to fewer parameters, then to pool order.
inline std::size_t choose_candidate(std::span<const CandidateResult> candidates) {
    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (c.diverged) continue;
        if (!chosen) {
            chosen = i;
            continue;
        }
        const auto& best = candidates[*chosen];
        if (c.validation_mse < best.validation_mse ||
            (c.validation_mse == best.validation_mse && c.config.parameter_count() < best.config.parameter_count())) {
            chosen = i;
        }
    }
    if (!chosen) throw SelectionFailed("every candidate structure diverged during training");
    return *chosen;
}

// Hold-out selection: train every candidate on the 80% split and pick the
// smallest inference-mode validation MSE.
inline SelectionReport select_structure(std::span<const nn::Example> data, const CandidatePool& pool,
                                        const nn::TrainConfig& train_cfg, const nn::InputAffineMap& map,
                                        std::size_t threads = 1) {
    pool.validate();
    train_cfg.validate();
    SelectionReport report;
    report.split_seed = split_seed_for(train_cfg);
    const auto [train_set, val_set] = split_80_20(data, report.split_seed);
    report.train_size = train_set.size();
    report.validation_size = val_set.size();

    report.candidates.resize(pool.candidates.size());
    parallel_for(pool.candidates.size(), threads, [&](std::size_t i) {
        CandidateResult& r = report.candidates[i];
        r.config = pool.candidates[i];
        r.seed = candidate_seed(train_cfg, i);
        nn::TrainConfig cfg = train_cfg;
        cfg.seed = r.seed;
        try {
            const auto result = nn::train(train_set, val_set, r.config, cfg, map);
            r.train_mse = result.history.train_mse.back();
            r.validation_mse = *result.history.validation_mse;
            if (!std::isfinite(r.validation_mse)) throw DivergedTraining(cfg.epochs, "non-finite validation MSE");
        } catch (const DivergedTraining& e) {
            r.diverged = true;
            r.error = e.what();
        }
    });

    report.chosen = choose_candidate(report.candidates);
    return report;
}

struct FittedNetwork {
    nn::NetworkParams params;
    SelectionReport report;
    nn::TrainHistory history;
};

// Selection followed by retraining the chosen structure on all rows.
inline FittedNetwork fit_network(std::span<const nn::Example> data, const CandidatePool& pool,
                                 const nn::TrainConfig& train_cfg, const nn::InputAffineMap& map,
                                 std::size_t threads = 1) {
    FittedNetwork out;
    out.report = select_structure(data, pool, train_cfg, map, threads);
    auto result = nn::train(data, {}, out.report.chosen_config(), train_cfg, map);
    out.params = std::move(result.params);
    out.history = std::move(result.history);
    return out;
}

inline nlohmann::json to_json(const SelectionReport& r) {
    using nlohmann::json;
    json candidates = json::array();
    for (const auto& c : r.candidates) {
        json entry{{"hidden_widths", c.config.hidden_widths},
                   {"dropout_rate", c.config.dropout_rate},
                   {"parameter_count", c.config.parameter_count()},
                   {"seed", c.seed},
                   {"diverged", c.diverged}};
        if (c.diverged) {
            entry["error"] = c.error;
        } else {
            entry["train_mse"] = c.train_mse;
            entry["validation_mse"] = c.validation_mse;
        }
        candidates.push_back(std::move(entry));
    }
    return {{"candidates", std::move(candidates)},
            {"chosen", r.chosen},
            {"split_seed", r.split_seed},
            {"train_size", r.train_size},
            {"validation_size", r.validation_size}};
}

}  // namespace ensemble
