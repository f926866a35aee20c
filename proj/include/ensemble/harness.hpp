#pragma once

// Replicated simulation studies: per-estimator bias/SD/MSE, relative
// efficiency, critical-value grid search and power curves. Every estimator in
// a study is evaluated on the same simulated datasets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/models/model.hpp"
#include "ensemble/parallel.hpp"
#include "ensemble/rng.hpp"

namespace ensemble {

// Welford mean/variance with Chan's pairwise merge.
class RunningStats {
public:
    void add(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const RunningStats& o) noexcept {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double n = na + nb;
        const double d = o.mean_ - mean_;
        mean_ += d * nb / n;
        m2_ += o.m2_ + d * d * na * nb / n;
        n_ += o.n_;
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    // Unbiased (R - 1 denominator).
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double population_variance() const noexcept { return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0; }
    double sd() const noexcept { return std::sqrt(variance()); }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Streaming summary of one estimator coordinate against a known truth.
class ErrorStats {
public:
    explicit ErrorStats(double truth = 0.0) : truth_(truth) {}

    void add(double x) noexcept {
        stats_.add(x);
        const double e = x - truth_;
        sq_err_.add(e * e);
    }

    void merge(const ErrorStats& o) noexcept {
        stats_.merge(o.stats_);
        sq_err_.merge(o.sq_err_);
    }

    const RunningStats& stats() const noexcept { return stats_; }
    double truth() const noexcept { return truth_; }
    double mse() const noexcept {
        return stats_.count() ? sq_err_.value() / static_cast<double>(stats_.count()) : 0.0;
    }

private:
    double truth_;
    RunningStats stats_;
    CompensatedSum sq_err_;
};

struct ReplicateMetrics {
    std::string scenario;
    std::string estimator;
    std::size_t coordinate = 0;
    std::size_t n_coordinates = 1;
    std::vector<double> phi;
    double truth = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double relative_bias = 0.0;  // NaN when truth is 0
    double sd = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    std::size_t R = 0;

    // "U" for scalar estimands, "U_2" for the second coordinate of a vector.
    std::string label() const {
        return n_coordinates == 1 ? estimator : estimator + "_" + std::to_string(coordinate + 1);
    }
};

inline ReplicateMetrics summarize(const ErrorStats& s) {
    if (s.stats().count() < 2) throw DegenerateMetrics("metrics need at least 2 replicates");
    ReplicateMetrics m;
    m.truth = s.truth();
    m.mean = s.stats().mean();
    m.bias = m.mean - m.truth;
    m.relative_bias = m.truth != 0.0 ? m.bias / std::abs(m.truth) : std::numeric_limits<double>::quiet_NaN();
    m.variance = s.stats().variance();
    m.sd = std::sqrt(m.variance);
    m.mse = s.mse();
    m.R = s.stats().count();
    return m;
}

struct RelativeEfficiency {
    std::string ensemble;
    std::string comparator;
    double ratio = 0.0;
};

// var(b) / var(a); a is the estimator of interest.
inline RelativeEfficiency relative_efficiency(const ReplicateMetrics& a, const ReplicateMetrics& b) {
    if (a.scenario != b.scenario || a.R != b.R || a.coordinate != b.coordinate) {
        throw InvalidInput("relative_efficiency: metrics come from different scenarios or replicate sets");
    }
    if (!(a.variance > 0.0) || !(b.variance > 0.0)) {
        throw DegenerateMetrics("relative_efficiency: zero variance for " + (a.variance > 0.0 ? b : a).label());
    }
    return {a.label(), b.label(), b.variance / a.variance};
}

// Estimators see the dataset and its base-estimator triple, computed once per
// replicate and shared.
template <class Dataset>
struct NamedEstimator {
    std::string id;
    std::function<std::vector<double>(const Dataset&, const EstimatorTriple&)> fn;
};

inline constexpr std::size_t kReplicateChunk = 1000;
inline constexpr double kMaxFailureFraction = 1e-3;

// Seed of the RNG stream for replicate chunk `chunk`. Results therefore do not
// depend on the thread count.
inline std::uint64_t chunk_seed(std::uint64_t seed, std::size_t chunk) noexcept { return derive_seed(seed, chunk); }

struct ScenarioResult {
    std::string name;
    std::vector<double> phi;
    std::size_t R_requested = 0;
    std::size_t failed = 0;
    std::vector<ReplicateMetrics> metrics;  // estimator-major, then coordinate

    const ReplicateMetrics& get(const std::string& estimator, std::size_t coordinate = 0) const {
        for (const auto& m : metrics) {
            if (m.estimator == estimator && m.coordinate == coordinate) return m;
        }
        throw InvalidInput("scenario " + name + " has no estimator '" + estimator + "' coordinate " +
                           std::to_string(coordinate));
    }

    double re(const std::string& ensemble, const std::string& comparator, std::size_t coordinate = 0) const {
        return relative_efficiency(get(ensemble, coordinate), get(comparator, coordinate)).ratio;
    }
};

namespace detail {

template <class Dataset>
void check_estimators(std::span<const NamedEstimator<Dataset>> estimators) {
    if (estimators.empty()) throw InvalidInput("no estimators given");
    for (std::size_t i = 0; i < estimators.size(); ++i) {
        if (estimators[i].id.empty() || !estimators[i].fn) throw InvalidInput("estimator without id or function");
        for (std::size_t j = 0; j < i; ++j) {
            if (estimators[i].id == estimators[j].id) throw InvalidInput("duplicate estimator id " + estimators[i].id);
        }
    }
}

inline void check_failures(std::size_t failed, std::size_t R, const std::string& what, const std::string& first) {
    if (static_cast<double>(failed) > kMaxFailureFraction * static_cast<double>(R)) {
        throw ScenarioFailed(what + ": " + std::to_string(failed) + " of " + std::to_string(R) +
                             " replicates failed (first: " + first + ")");
    }
}

}  // namespace detail

// Simulates R datasets at phi and evaluates every estimator on each. A
// replicate on which any estimator (or the base triple) fails is dropped for
// all estimators; more than 0.1% dropped replicates fails the scenario.
template <models::EnsembleModel Model>
ScenarioResult run_scenario(const Model& model, const ParamPoint& phi,
                            std::span<const NamedEstimator<typename Model::Dataset>> estimators, std::size_t R,
                            std::uint64_t seed, std::size_t threads = 1, std::string name = {}) {
    detail::check_estimators(estimators);
    if (R < 2) throw InvalidInput("run_scenario: R must be >= 2");
    const std::vector<double> truth = model.estimand(phi);
    const std::size_t p = truth.size();
    const auto sampler = model.sampler(phi);

    struct Chunk {
        std::vector<ErrorStats> stats;
        std::size_t failed = 0;
        std::string first_error;
    };
    const std::size_t n_chunks = (R + kReplicateChunk - 1) / kReplicateChunk;
    std::vector<Chunk> chunks(n_chunks);
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        Chunk& ch = chunks[c];
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            for (std::size_t j = 0; j < p; ++j) ch.stats.emplace_back(truth[j]);
        }
        Rng rng(chunk_seed(seed, c));
        const std::size_t end = std::min(R, (c + 1) * kReplicateChunk);
        std::vector<double> values(estimators.size() * p);
        for (std::size_t r = c * kReplicateChunk; r < end; ++r) {
            const auto data = sampler(rng);
            try {
                const EstimatorTriple triple = model.triple(data);
                for (std::size_t e = 0; e < estimators.size(); ++e) {
                    const std::vector<double> v = estimators[e].fn(data, triple);
                    if (v.size() != p) {
                        throw InvalidInput("estimator " + estimators[e].id + " returned " + std::to_string(v.size()) +
                                           " values, expected " + std::to_string(p));
                    }
                    for (std::size_t j = 0; j < p; ++j) {
                        if (!std::isfinite(v[j])) throw InvalidInput("estimator " + estimators[e].id + " returned a non-finite value");
                        values[e * p + j] = v[j];
                    }
                }
            } catch (const Error& err) {
                if (ch.failed++ == 0) ch.first_error = err.what();
                continue;
            }
            for (std::size_t k = 0; k < values.size(); ++k) ch.stats[k].add(values[k]);
        }
    });

    std::vector<ErrorStats> total;
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        for (std::size_t j = 0; j < p; ++j) total.emplace_back(truth[j]);
    }
    ScenarioResult out;
    out.name = name;
    out.phi = phi.vector();
    out.R_requested = R;
    std::string first;
    for (const auto& ch : chunks) {
        for (std::size_t k = 0; k < total.size(); ++k) total[k].merge(ch.stats[k]);
        if (ch.failed && first.empty()) first = ch.first_error;
        out.failed += ch.failed;
    }
    detail::check_failures(out.failed, R, "scenario " + name, first);

    for (std::size_t e = 0; e < estimators.size(); ++e) {
        for (std::size_t j = 0; j < p; ++j) {
            ReplicateMetrics m = summarize(total[e * p + j]);
            m.scenario = name;
            m.estimator = estimators[e].id;
            m.coordinate = j;
            m.n_coordinates = p;
            m.phi = out.phi;
            out.metrics.push_back(std::move(m));
        }
    }
    return out;
}

template <models::EnsembleModel Model>
ScenarioResult run_scenario(const Model& model, const ParamPoint& phi,
                            const std::vector<NamedEstimator<typename Model::Dataset>>& estimators, std::size_t R,
                            std::uint64_t seed, std::size_t threads = 1, std::string name = {}) {
    return run_scenario(model, phi, std::span<const NamedEstimator<typename Model::Dataset>>(estimators), R, seed,
                        threads, std::move(name));
}

// ---------------------------------------------------------------------------
// Critical values

// 0, 0.001, ..., 0.2
inline std::vector<double> default_critical_grid() {
    std::vector<double> g(201);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / 1000.0;
    return g;
}

struct CriticalValue {
    std::string estimator;
    double critical_value = 0.0;
    std::vector<double> null_rejection;  // P(estimate > c) at each null point, same replicates as the search
    std::size_t R = 0;
};

namespace detail {

inline void check_search_inputs(double alpha, std::span<const double> grid) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("critical value search: alpha must lie in (0, 1)");
    if (grid.empty()) throw InvalidInput("critical value search: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw InvalidInput("critical value search: grid must be strictly increasing");
    }
}

// Fraction of sorted values strictly above c.
inline double exceed_fraction(const std::vector<double>& sorted, double c) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), c);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

// Scalar draws of every estimator at phi, in replicate order.
template <models::EnsembleModel Model>
std::vector<std::vector<double>> simulate_values(const Model& model, const ParamPoint& phi,
                                                 std::span<const NamedEstimator<typename Model::Dataset>> estimators,
                                                 std::size_t R, std::uint64_t seed, std::size_t threads,
                                                 std::size_t& failed) {
    const auto sampler = model.sampler(phi);
    const std::size_t n_chunks = (R + kReplicateChunk - 1) / kReplicateChunk;
    std::vector<std::vector<std::vector<double>>> per_chunk(n_chunks);
    std::vector<std::size_t> chunk_failed(n_chunks, 0);
    std::vector<std::string> chunk_error(n_chunks);
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        auto& vals = per_chunk[c];
        vals.assign(estimators.size(), {});
        Rng rng(chunk_seed(seed, c));
        const std::size_t end = std::min(R, (c + 1) * kReplicateChunk);
        std::vector<double> row(estimators.size());
        for (std::size_t r = c * kReplicateChunk; r < end; ++r) {
            const auto data = sampler(rng);
            try {
                const EstimatorTriple triple = model.triple(data);
                for (std::size_t e = 0; e < estimators.size(); ++e) {
                    const auto v = estimators[e].fn(data, triple);
                    if (v.size() != 1) throw InvalidInput("estimator " + estimators[e].id + " must be scalar here");
                    if (!std::isfinite(v[0])) throw InvalidInput("estimator " + estimators[e].id + " returned a non-finite value");
                    row[e] = v[0];
                }
            } catch (const Error& err) {
                if (chunk_failed[c]++ == 0) chunk_error[c] = err.what();
                continue;
            }
            for (std::size_t e = 0; e < estimators.size(); ++e) vals[e].push_back(row[e]);
        }
    });
    std::vector<std::vector<double>> out(estimators.size());
    failed = 0;
    std::string first;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            out[e].insert(out[e].end(), per_chunk[c][e].begin(), per_chunk[c][e].end());
        }
        if (chunk_failed[c] && first.empty()) first = chunk_error[c];
        failed += chunk_failed[c];
    }
    check_failures(failed, R, "simulation", first);
    return out;
}

}  // namespace detail

// For each estimator, the smallest grid value c with max over the null points
// of P(estimate > c) <= alpha. All estimators share the simulated datasets.
template <models::EnsembleModel Model>
std::vector<CriticalValue> critical_value_search(const Model& model, std::span<const ParamPoint> null_points,
                                                 std::span<const NamedEstimator<typename Model::Dataset>> estimators,
                                                 double alpha, std::span<const double> grid, std::size_t R,
                                                 std::uint64_t seed, std::size_t threads = 1) {
    detail::check_estimators(estimators);
    detail::check_search_inputs(alpha, grid);
    if (null_points.empty()) throw InvalidInput("critical value search: no null points");
    if (R < 2) throw InvalidInput("critical value search: R must be >= 2");

    // sorted[e][k]: estimator e at null point k
    std::vector<std::vector<std::vector<double>>> sorted(estimators.size());
    for (std::size_t k = 0; k < null_points.size(); ++k) {
        std::size_t failed = 0;
        auto vals = detail::simulate_values(model, null_points[k], estimators, R, derive_seed(seed, k), threads, failed);
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            std::sort(vals[e].begin(), vals[e].end());
            sorted[e].push_back(std::move(vals[e]));
        }
    }

    std::vector<CriticalValue> out;
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        bool found = false;
        for (double c : grid) {
            double worst = 0.0;
            for (const auto& s : sorted[e]) worst = std::max(worst, detail::exceed_fraction(s, c));
            if (worst <= alpha) {
                CriticalValue cv{estimators[e].id, c, {}, sorted[e].front().size()};
                for (const auto& s : sorted[e]) cv.null_rejection.push_back(detail::exceed_fraction(s, c));
                out.push_back(std::move(cv));
                found = true;
                break;
            }
        }
        if (!found) {
            throw SearchFailed("no grid value up to " + std::to_string(grid.back()) + " keeps the type I error of " +
                               estimators[e].id + " at or below " + std::to_string(alpha));
        }
    }
    return out;
}

template <models::EnsembleModel Model>
double critical_value_search(const Model& model, std::span<const ParamPoint> null_points,
                             const NamedEstimator<typename Model::Dataset>& estimator, double alpha,
                             std::span<const double> grid, std::size_t R, std::uint64_t seed,
                             std::size_t threads = 1) {
    const std::vector<NamedEstimator<typename Model::Dataset>> one{estimator};
    return critical_value_search(model, null_points, std::span(one), alpha, grid, R, seed, threads)
        .front()
        .critical_value;
}

// ---------------------------------------------------------------------------
// Power

struct PowerPoint {
    double theta = 0.0;
    std::string estimator;
    double power = 0.0;
    double critical_value = 0.0;
    std::size_t R = 0;
    double se = 0.0;  // binomial Monte Carlo standard error
};

// Rejection counts per theta. joint[t][a][b] counts replicates where both a
// and b reject, so paired differences get an exact standard error.
struct PowerCurve {
    std::vector<double> thetas;
    std::vector<std::string> estimators;
    std::vector<double> critical_values;
    std::vector<std::size_t> R;  // per theta, after dropped replicates
    std::vector<std::vector<std::vector<std::size_t>>> joint;

    std::size_t index_of(const std::string& id) const {
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            if (estimators[e] == id) return e;
        }
        throw InvalidInput("power curve has no estimator '" + id + "'");
    }

    double power(std::size_t t, std::size_t e) const {
        return static_cast<double>(joint[t][e][e]) / static_cast<double>(R[t]);
    }

    // SE of power(a) - power(b) under common random numbers.
    double paired_se(std::size_t t, std::size_t a, std::size_t b) const {
        const double n = static_cast<double>(R[t]);
        const double pa = power(t, a), pb = power(t, b);
        const double pab = static_cast<double>(joint[t][a][b]) / n;
        const double var = pa + pb - 2.0 * pab - (pa - pb) * (pa - pb);
        return std::sqrt(std::max(var, 0.0) / n);
    }

    std::vector<PowerPoint> points() const {
        std::vector<PowerPoint> out;
        for (std::size_t t = 0; t < thetas.size(); ++t) {
            for (std::size_t e = 0; e < estimators.size(); ++e) {
                const double p = power(t, e);
                out.push_back({thetas[t], estimators[e], p, critical_values[e], R[t],
                               std::sqrt(p * (1.0 - p) / static_cast<double>(R[t]))});
            }
        }
        return out;
    }
};

// Rejection frequency of "estimate > c" at phi = make_phi(theta) for every theta.
template <models::EnsembleModel Model>
PowerCurve power_curve(const Model& model, const std::function<ParamPoint(double)>& make_phi,
                       std::span<const NamedEstimator<typename Model::Dataset>> estimators,
                       std::span<const double> critical_values, std::span<const double> thetas, std::size_t R,
                       std::uint64_t seed, std::size_t threads = 1) {
    detail::check_estimators(estimators);
    if (critical_values.size() != estimators.size()) throw InvalidInput("power_curve: one critical value per estimator");
    if (thetas.empty()) throw InvalidInput("power_curve: empty theta grid");
    if (R < 2) throw InvalidInput("power_curve: R must be >= 2");
    PowerCurve out;
    out.thetas.assign(thetas.begin(), thetas.end());
    out.critical_values.assign(critical_values.begin(), critical_values.end());
    for (const auto& e : estimators) out.estimators.push_back(e.id);
    const std::size_t E = estimators.size();
    for (std::size_t t = 0; t < thetas.size(); ++t) {
        std::size_t failed = 0;
        const auto vals =
            detail::simulate_values(model, make_phi(thetas[t]), estimators, R, derive_seed(seed, t), threads, failed);
        const std::size_t n = vals.front().size();
        std::vector<std::vector<std::size_t>> joint(E, std::vector<std::size_t>(E, 0));
        std::vector<char> rej(E);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t e = 0; e < E; ++e) rej[e] = vals[e][r] > critical_values[e];
            for (std::size_t a = 0; a < E; ++a) {
                if (!rej[a]) continue;
                for (std::size_t b = 0; b < E; ++b) joint[a][b] += rej[b] ? 1 : 0;
            }
        }
        out.R.push_back(n);
        out.joint.push_back(std::move(joint));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output

enum class TableFormat { csv, json };

inline TableFormat parse_table_format(const std::string& s) {
    if (s == "csv") return TableFormat::csv;
    if (s == "json") return TableFormat::json;
    throw InvalidInput("unknown table format '" + s + "' (expected csv or json)");
}

namespace detail {

inline std::string fmt6(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// The number a reader of the CSV sees, so CSV and JSON agree exactly.
inline nlohmann::json json6(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(fmt6(v).c_str(), nullptr);
}

inline std::vector<std::string> estimator_ids(std::span<const ReplicateMetrics> rows) {
    std::vector<std::string> ids;
    for (const auto& m : rows) {
        if (std::find(ids.begin(), ids.end(), m.estimator) == ids.end()) ids.push_back(m.estimator);
    }
    return ids;
}

// var(comparator)/var(row) within the row's scenario and coordinate; NaN if absent.
inline double re_lookup(std::span<const ReplicateMetrics> rows, const ReplicateMetrics& row, const std::string& id) {
    for (const auto& m : rows) {
        if (m.scenario == row.scenario && m.coordinate == row.coordinate && m.estimator == id) {
            if (!(row.variance > 0.0)) return std::numeric_limits<double>::quiet_NaN();
            return m.variance / row.variance;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline void open_for_write(std::ofstream& out, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    out.open(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
}

}  // namespace detail

// Columns: scenario,estimator,mean,bias,sd,mse,re_vs_<id>...,rel_bias,truth,R
inline void write_metrics_csv(std::ostream& out, std::span<const ReplicateMetrics> rows) {
    if (rows.empty()) throw InvalidInput("emit_table: no metrics rows");
    const auto ids = detail::estimator_ids(rows);
    out << "scenario,estimator,mean,bias,sd,mse";
    for (const auto& id : ids) out << ",re_vs_" << id;
    out << ",rel_bias,truth,R\n";
    for (const auto& m : rows) {
        out << m.scenario << ',' << m.label() << ',' << detail::fmt6(m.mean) << ',' << detail::fmt6(m.bias) << ','
            << detail::fmt6(m.sd) << ',' << detail::fmt6(m.mse);
        for (const auto& id : ids) out << ',' << detail::fmt6(detail::re_lookup(rows, m, id));
        out << ',' << detail::fmt6(m.relative_bias) << ',' << detail::fmt6(m.truth) << ',' << m.R << '\n';
    }
}

inline nlohmann::json metrics_to_json(std::span<const ReplicateMetrics> rows) {
    if (rows.empty()) throw InvalidInput("emit_table: no metrics rows");
    const auto ids = detail::estimator_ids(rows);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : rows) {
        nlohmann::json row{{"scenario", m.scenario}, {"estimator", m.label()},     {"mean", detail::json6(m.mean)},
                           {"bias", detail::json6(m.bias)}, {"sd", detail::json6(m.sd)}, {"mse", detail::json6(m.mse)}};
        for (const auto& id : ids) row["re_vs_" + id] = detail::json6(detail::re_lookup(rows, m, id));
        row["rel_bias"] = detail::json6(m.relative_bias);
        row["truth"] = detail::json6(m.truth);
        row["R"] = m.R;
        out.push_back(std::move(row));
    }
    return out;
}

// Columns: theta,estimator,power,critical_value,R,se
inline void write_power_csv(std::ostream& out, std::span<const PowerPoint> points) {
    if (points.empty()) throw InvalidInput("emit_table: no power points");
    out << "theta,estimator,power,critical_value,R,se\n";
    for (const auto& p : points) {
        out << detail::fmt6(p.theta) << ',' << p.estimator << ',' << detail::fmt6(p.power) << ','
            << detail::fmt6(p.critical_value) << ',' << p.R << ',' << detail::fmt6(p.se) << '\n';
    }
}

inline nlohmann::json power_to_json(std::span<const PowerPoint> points) {
    if (points.empty()) throw InvalidInput("emit_table: no power points");
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : points) {
        out.push_back({{"theta", detail::json6(p.theta)},
                       {"estimator", p.estimator},
                       {"power", detail::json6(p.power)},
                       {"critical_value", detail::json6(p.critical_value)},
                       {"R", p.R},
                       {"se", detail::json6(p.se)}});
    }
    return out;
}

inline void emit_table(std::span<const ReplicateMetrics> rows, const std::filesystem::path& path, TableFormat format) {
    if (rows.empty()) throw InvalidInput("emit_table: no metrics rows");
    std::ofstream out;
    detail::open_for_write(out, path);
    if (format == TableFormat::csv) {
        write_metrics_csv(out, rows);
    } else {
        out << metrics_to_json(rows).dump(2) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

inline void emit_table(std::span<const PowerPoint> points, const std::filesystem::path& path, TableFormat format) {
    if (points.empty()) throw InvalidInput("emit_table: no power points");
    std::ofstream out;
    detail::open_for_write(out, path);
    if (format == TableFormat::csv) {
        write_power_csv(out, points);
    } else {
        out << power_to_json(points).dump(2) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ensemble
