// Command-line driver: label generation, training, estimation and the
// simulation studies.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ensemble/experiments.hpp"
#include "ensemble/labels.hpp"
#include "ensemble/models/adaptive_trial.hpp"
#include "ensemble/models/het_regression.hpp"
#include "ensemble/models/scale_uniform.hpp"
#include "ensemble/nn_io.hpp"
#include "ensemble/pipeline.hpp"
#include "ensemble/select.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ensemble;

namespace {

constexpr const char* kOutDirEnv = "ENSEMBLE_OUT_DIR";

// Thrown for bad option values discovered after parsing (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 1;
    std::size_t threads = default_threads();
    std::string out_dir;
    std::string config;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out-dir", c.out_dir, std::string("Output directory (default: $") + kOutDirEnv + " or .)");
    sub->add_option("--config", c.config, "JSON file of option values; command-line flags take precedence");
}

fs::path resolve_out_dir(const Common& c) {
    fs::path dir = c.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        dir = env && *env ? fs::path(env) : fs::path(".");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

// --config support: the file's keys become flags inserted right after the
// subcommand, skipping any flag the user also gave, so the command line wins
// and every value passes through the same validators.
std::vector<std::string> config_tokens(const json& doc, const std::vector<std::string>& user_args) {
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
    auto given = [&](const std::string& flag) {
        for (const auto& a : user_args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };
    auto scalar = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_array()) {
            std::string s;
            for (const auto& e : v) s += (s.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
            return s;
        }
        return v.dump();
    };
    std::vector<std::string> out;
    for (const auto& [key, value] : doc.items()) {
        if (key == "config") continue;
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
        } else if (value.is_array() && !value.empty() && (value.front().is_array() || value.front().is_string())) {
            for (const auto& e : value) {
                out.push_back(flag);
                out.push_back(scalar(e));
            }
        } else if (value.is_null() || value.is_object()) {
            throw UsageError("config key '" + key + "' must be a scalar or an array");
        } else {
            out.push_back(flag);
            out.push_back(scalar(value));
        }
    }
    return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args, const std::vector<std::string>& subcommands) {
    if (args.size() < 2) return args;
    bool is_sub = false;
    for (const auto& s : subcommands) is_sub = is_sub || args[1] == s;
    if (!is_sub) return args;
    std::string path;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
    const std::vector<std::string> user(args.begin() + 2, args.end());
    std::vector<std::string> out(args.begin(), args.begin() + 2);
    for (auto& t : config_tokens(doc, user)) out.push_back(std::move(t));
    out.insert(out.end(), user.begin(), user.end());
    return out;
}

const std::vector<std::string> kModels{models::ScaleUniform::id(), models::HetRegression::id(),
                                       models::AdaptiveTrial::id()};

// Sample size flag; 0 keeps the model default.
std::size_t model_n(const std::string& model, std::size_t n) {
    if (n != 0) return n;
    return model == models::HetRegression::id() ? 100 : 10;
}

template <class Fn>
auto with_model(const std::string& id, std::size_t n, Fn&& fn) {
    if (id == models::ScaleUniform::id()) return fn(models::ScaleUniform(model_n(id, n)));
    if (id == models::HetRegression::id()) return fn(models::HetRegression(model_n(id, n)));
    if (id == models::AdaptiveTrial::id()) return fn(models::AdaptiveTrial{});
    throw UsageError("unknown model " + id);
}

std::optional<LabelRule> label_rule_option(const std::string& s) {
    if (s == "auto") return std::nullopt;
    return parse_label_rule(s);
}

// ---------------------------------------------------------------------------
// Observed data files for `estimate`.

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    if (line != expected) throw ParseError(path.string() + ": line 1: expected header '" + expected + "'");
    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != header.size()) {
            throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
        }
        rows.push_back(std::move(f));
    }
    if (rows.empty()) throw ParseError(path.string() + ": no data rows");
    return rows;
}

double field_number(const std::string& s, const fs::path& path, std::size_t row) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw ParseError(path.string() + ": data row " + std::to_string(row) + ": not a finite number: '" + s + "'");
    }
    return v;
}

int field_count(const std::string& s, const fs::path& path, std::size_t row) {
    const double v = field_number(s, path, row);
    if (v != std::floor(v) || v < 0 || v > 1e9) {
        throw ParseError(path.string() + ": data row " + std::to_string(row) + ": not a count: '" + s + "'");
    }
    return static_cast<int>(v);
}

models::ScaleUniform::Dataset read_scale_uniform(const fs::path& path, double k) {
    models::ScaleUniform::Dataset d;
    d.k = k;
    const auto rows = read_csv_rows(path, {"x"});
    for (std::size_t i = 0; i < rows.size(); ++i) d.x.push_back(field_number(rows[i][0], path, i + 1));
    return d;
}

models::RegressionDataset read_regression(const fs::path& path) {
    const auto rows = read_csv_rows(path, {"x1", "x2", "x3", "y"});
    models::RegressionDataset d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), models::kRegressionDim);
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        d.x(r, 0) = 1.0;
        for (int j = 0; j < 3; ++j) d.x(r, j + 1) = field_number(rows[i][j], path, i + 1);
        d.y(r) = field_number(rows[i][3], path, i + 1);
    }
    return d;
}

models::TrialDataset read_trial(const fs::path& path) {
    const auto rows = read_csv_rows(path, {"stage", "arm", "responders", "size"});
    models::TrialDataset d;
    bool seen[2][2] = {{false, false}, {false, false}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int stage = field_count(rows[i][0], path, i + 1);
        const std::string& arm = rows[i][1];
        if (stage != 1 && stage != 2) throw ParseError(path.string() + ": stage must be 1 or 2");
        if (arm != "control" && arm != "treatment") throw ParseError(path.string() + ": arm must be control or treatment");
        const int a = arm == "treatment" ? 1 : 0;
        if (seen[stage - 1][a]) throw ParseError(path.string() + ": duplicate row for stage " + std::to_string(stage) + " " + arm);
        seen[stage - 1][a] = true;
        models::StageCounts& s = stage == 1 ? d.stage1 : d.stage2;
        const int size = field_count(rows[i][3], path, i + 1);
        if (s.size != 0 && s.size != size) throw ParseError(path.string() + ": arms of a stage must have equal size");
        s.size = size;
        (a ? s.treatment_responders : s.control_responders) = field_count(rows[i][2], path, i + 1);
    }
    for (auto& st : seen) {
        if (!st[0] || !st[1]) throw ParseError(path.string() + ": need one row per stage and arm");
    }
    return d;
}

// ---------------------------------------------------------------------------

struct StudyFlags {
    std::string scale = "desk";
    std::size_t M = 0, N = 0, R = 0;  // 0: scale preset
    std::size_t epochs = 0;            // 0: training default
    std::string label_rule = "auto";
    std::string format = "csv";

    void add(CLI::App* sub) {
        sub->add_option("--scale", scale, "Preset sizes: desk or paper")
            ->check(CLI::IsMember({"desk", "paper"}))
            ->capture_default_str();
        sub->add_option("--M", M, "Labeled parameter points (overrides the preset)")->check(CLI::PositiveNumber);
        sub->add_option("--N", N, "Monte Carlo datasets per label (overrides the preset)")->check(CLI::Range(100ul, ~0ul));
        sub->add_option("--R", R, "Evaluation replicates per scenario (overrides the preset)")
            ->check(CLI::Range(1000ul, ~0ul));
        sub->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
        sub->add_option("--label-rule", label_rule, "auto, raw-moments or centered")
            ->check(CLI::IsMember({"auto", "raw-moments", "centered"}))
            ->capture_default_str();
        sub->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    }

    StudyConfig resolve(const Common& c) const {
        StudyConfig cfg = StudyConfig::preset(parse_scale(scale));
        if (M) cfg.M = M;
        if (N) cfg.N = N;
        if (R) cfg.R = R;
        if (epochs) cfg.train.epochs = epochs;
        cfg.seed = c.seed;
        cfg.threads = c.threads;
        cfg.label_rule = label_rule_option(label_rule);
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Unbiased ensemble estimators with a learned combination weight"};
    app.require_subcommand(1);

    // gen-labels
    Common gl_common;
    std::string gl_model;
    std::size_t gl_M = 200, gl_N = 10000, gl_n = 0;
    std::string gl_rule = "auto", gl_out;
    auto* gen = app.add_subcommand("gen-labels", "Simulate a labeled training set");
    gen->add_option("--model", gl_model, "Model id")->required()->check(CLI::IsMember(kModels));
    gen->add_option("--M", gl_M, "Number of parameter points")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--N", gl_N, "Monte Carlo datasets per label")->check(CLI::Range(100ul, ~0ul))->capture_default_str();
    gen->add_option("--n", gl_n, "Per-dataset sample size (model default if omitted)")->check(CLI::PositiveNumber);
    gen->add_option("--label-rule", gl_rule, "auto, raw-moments or centered")
        ->check(CLI::IsMember({"auto", "raw-moments", "centered"}))
        ->capture_default_str();
    gen->add_option("--out", gl_out, "Output CSV (default: <out-dir>/labels.csv)");
    add_common(gen, gl_common);

    // train
    Common tr_common;
    std::string tr_data, tr_model, tr_out;
    std::vector<std::string> tr_candidates;
    std::size_t tr_epochs = 1000, tr_batch = 100, tr_n = 0;
    double tr_lr = 1e-3, tr_decay = 0.9, tr_eps = 1e-8, tr_dropout = 0.1;
    auto* tr = app.add_subcommand("train", "Select a network structure and train it on a labeled set");
    tr->add_option("--data", tr_data, "Labeled CSV from gen-labels")->required();
    tr->add_option("--model", tr_model, "Model id; fixes the network input domain to the model's prior support")
        ->check(CLI::IsMember(kModels));
    tr->add_option("--n", tr_n, "Per-dataset sample size of the model")->check(CLI::PositiveNumber);
    tr->add_option("--candidate", tr_candidates, "Hidden widths of one candidate, e.g. 40,40 (repeatable)");
    tr->add_option("--epochs", tr_epochs, "Training epochs")->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--batch-size", tr_batch, "Mini-batch size")->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--lr", tr_lr, "RMSProp learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--rmsprop-decay", tr_decay, "RMSProp decay")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    tr->add_option("--rmsprop-epsilon", tr_eps, "RMSProp epsilon")->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--dropout", tr_dropout, "Dropout rate on hidden layers")->check(CLI::Range(0.0, 0.99))->capture_default_str();
    tr->add_option("--out", tr_out, "Network file (default: <out-dir>/network.json)");
    add_common(tr, tr_common);

    // estimate
    Common es_common;
    std::string es_model, es_network, es_data;
    double es_k = 0.0;
    auto* es = app.add_subcommand("estimate", "Apply a trained network to one observed dataset");
    es->add_option("--model", es_model, "Model id")->required()->check(CLI::IsMember(kModels));
    es->add_option("--network", es_network, "Network file from train")->required();
    es->add_option("--data", es_data,
                   "Observed data CSV. scale-uniform: x; het-regression: x1,x2,x3,y; "
                   "adaptive-trial: stage,arm,responders,size")
        ->required();
    es->add_option("--k", es_k, "Known scale-uniform k")->check(CLI::Range(0.0, 1.0));
    add_common(es, es_common);

    // experiment
    Common ex_common;
    StudyFlags ex_flags;
    std::string ex_name;
    auto* ex = app.add_subcommand("experiment", "Reproduce a simulation study");
    ex->add_option("name", ex_name, "table1, table2, table3 or power")
        ->required()
        ->check(CLI::IsMember({"table1", "table2", "table3", "power"}));
    ex_flags.add(ex);
    add_common(ex, ex_common);

    // power-search
    Common ps_common;
    StudyFlags ps_flags;
    double ps_alpha = 0.05;
    auto* ps = app.add_subcommand("power-search", "Critical values for the adaptive trial by grid search");
    ps->add_option("--alpha", ps_alpha, "Type I error level")->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
    ps_flags.add(ps);
    add_common(ps, ps_common);

    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args, {"gen-labels", "train", "estimate", "experiment", "power-search"});
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        StudyConfig cfg;
        cfg.label_rule = label_rule_option(gl_rule);
        const fs::path dir = resolve_out_dir(gl_common);
        const fs::path out = gl_out.empty() ? dir / "labels.csv" : fs::path(gl_out);
        with_model(gl_model, gl_n, [&](const auto& model) {
            using M = std::decay_t<decltype(model)>;
            const LabelRule rule = cfg.label_rule.value_or(default_label_rule(M::id()));
            write_json(dir / "gen-labels.config.json",
                       {{"command", "gen-labels"}, {"model", gl_model}, {"M", gl_M}, {"N", gl_N},
                        {"n", gl_model == models::AdaptiveTrial::id() ? json(nullptr) : json(model_n(gl_model, gl_n))},
                        {"label_rule", to_string(rule)}, {"seed", gl_common.seed}, {"threads", gl_common.threads},
                        {"out", out.string()}});
            const auto data = build_dataset(model, model.prior(), gl_M, gl_N, gl_common.seed, gl_common.threads, rule);
            write_dataset_csv(out, data);
            return 0;
        });
        std::cerr << "wrote " << out.string() << '\n';
        return 0;
    }

    if (tr->parsed()) {
        nn::TrainConfig tc;
        tc.epochs = tr_epochs;
        tc.batch_size = tr_batch;
        tc.learning_rate = tr_lr;
        tc.rmsprop_decay = tr_decay;
        tc.rmsprop_epsilon = tr_eps;
        tc.dropout_rate = tr_dropout;
        tc.seed = tr_common.seed;
        try {
            tc.validate();
        } catch (const InvalidInput& e) {
            throw UsageError(e.what());
        }
        const fs::path dir = resolve_out_dir(tr_common);
        const auto data = read_dataset_csv(fs::path(tr_data));
        const auto examples = to_examples(data);
        const std::size_t in_dim = examples.front().input.size();
        const std::size_t out_dim = examples.front().target.size();

        CandidatePool pool;
        if (tr_candidates.empty()) {
            pool = CandidatePool::standard(in_dim, out_dim, tc.dropout_rate);
        } else {
            for (const auto& spec : tr_candidates) {
                nn::NetworkConfig c{in_dim, {}, tc.dropout_rate, out_dim};
                std::stringstream ss(spec);
                std::string w;
                while (std::getline(ss, w, ',')) {
                    char* end = nullptr;
                    const long v = std::strtol(w.c_str(), &end, 10);
                    if (w.empty() || *end != '\0' || v <= 0) throw UsageError("bad --candidate '" + spec + "'");
                    c.hidden_widths.push_back(static_cast<std::size_t>(v));
                }
                pool.candidates.push_back(c);
            }
            try {
                pool.validate();
            } catch (const InvalidInput& e) {
                throw UsageError(e.what());
            }
        }

        nn::InputAffineMap map;
        if (tr_model.empty()) {
            map = nn::bounding_map(examples);
        } else {
            with_model(tr_model, tr_n, [&](const auto& model) {
                if (model.param_dim() != in_dim || model.output_dim() != out_dim) {
                    throw InvalidInput("dataset shape does not match model " + tr_model);
                }
                map = nn::InputAffineMap{model.prior().hulls()};
                return 0;
            });
        }

        json candidates = json::array();
        for (const auto& c : pool.candidates) candidates.push_back(c.hidden_widths);
        const fs::path out = tr_out.empty() ? dir / "network.json" : fs::path(tr_out);
        write_json(dir / "train.config.json",
                   {{"command", "train"}, {"data", tr_data}, {"model", tr_model.empty() ? json(nullptr) : json(tr_model)},
                    {"candidates", candidates}, {"epochs", tc.epochs}, {"batch_size", tc.batch_size},
                    {"learning_rate", tc.learning_rate}, {"rmsprop_decay", tc.rmsprop_decay},
                    {"rmsprop_epsilon", tc.rmsprop_epsilon}, {"dropout_rate", tc.dropout_rate},
                    {"seed", tc.seed}, {"threads", tr_common.threads}, {"out", out.string()}});

        const auto fitted = fit_network(examples, pool, tc, map, tr_common.threads);
        nn::save_params(fitted.params, out);
        json report = to_json(fitted.report);
        report["final_train_mse"] = fitted.history.train_mse.back();
        write_json(dir / "selection.json", report);
        std::cerr << "chose " << fitted.report.chosen_config().describe() << ", wrote " << out.string() << '\n';
        return 0;
    }

    if (es->parsed()) {
        const fs::path dir = resolve_out_dir(es_common);
        const auto params = nn::load_params(fs::path(es_network));
        const std::string net_id = fs::path(es_network).filename().string();
        json result;
        if (es_model == models::ScaleUniform::id()) {
            if (es->count("--k") == 0) throw UsageError("--k is required for scale-uniform");
            const auto d = read_scale_uniform(es_data, es_k);
            result = to_json(estimate(models::ScaleUniform(d.x.size()), d, params, net_id));
        } else if (es_model == models::HetRegression::id()) {
            const auto d = read_regression(es_data);
            result = to_json(estimate(models::HetRegression(static_cast<std::size_t>(d.y.size())), d, params, net_id));
        } else {
            const auto d = read_trial(es_data);
            result = to_json(estimate(models::AdaptiveTrial{}, d, params, net_id));
        }
        result["model"] = es_model;
        write_json(dir / "estimate.config.json",
                   {{"command", "estimate"}, {"model", es_model}, {"network", es_network}, {"data", es_data},
                    {"k", es_model == models::ScaleUniform::id() ? json(es_k) : json(nullptr)}});
        write_json(dir / "estimate.json", result);
        std::cout << result.dump(2) << '\n';
        return 0;
    }

    if (ex->parsed() || ps->parsed()) {
        const bool is_ps = ps->parsed();
        const Common& common = is_ps ? ps_common : ex_common;
        const StudyFlags& flags = is_ps ? ps_flags : ex_flags;
        StudyConfig cfg = flags.resolve(common);
        try {
            cfg.validate();
        } catch (const InvalidInput& e) {
            throw UsageError(e.what());
        }
        const fs::path dir = resolve_out_dir(common);
        const TableFormat format = parse_table_format(flags.format);
        const std::string ext = flags.format;
        const std::string name = is_ps ? "power-search" : ex_name;

        json echo = to_json(cfg);
        echo["command"] = is_ps ? "power-search" : "experiment";
        echo["name"] = name;
        echo["scale"] = flags.scale;
        echo["format"] = flags.format;
        if (is_ps) echo["alpha"] = ps_alpha;
        write_json(dir / (name + ".config.json"), echo);

        if (name == "table1" || name == "table2" || name == "table3") {
            const StudyResult r = name == "table1" ? table1_study(cfg) : name == "table2" ? table2_study(cfg) : table3_study(cfg);
            const auto rows = r.rows();
            emit_table(std::span<const ReplicateMetrics>(rows), dir / (name + "." + ext), format);
            write_json(dir / (name + ".networks.json"), r.networks);
            std::cerr << "wrote " << (dir / (name + "." + ext)).string() << '\n';
            return 0;
        }

        PowerStudyConfig pcfg;
        pcfg.alpha = ps_alpha;
        const PowerStudyResult r = power_study(cfg, pcfg, nullptr, !is_ps);
        write_json(dir / (name + ".critical_values.json"), to_json(r));
        if (r.curve) {
            const auto pts = r.curve->points();
            emit_table(std::span<const PowerPoint>(pts), dir / (name + "." + ext), format);
        }
        for (const auto& c : r.critical_values) std::cout << c.estimator << " critical value " << c.critical_value << '\n';
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
