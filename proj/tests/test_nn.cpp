#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include <json.hpp>

#include "catch_amalgamated.hpp"

#include "ensemble/nn.hpp"
#include "ensemble/nn_io.hpp"
#include "oracles/finite_difference.hpp"

using namespace ensemble;
using namespace ensemble::nn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

NetworkParams unit_chain() {
    NetworkConfig cfg{1, {1}, 0.0, 1};
    auto p = zero_network(cfg, InputAffineMap::identity(1));
    p.layers[0].weights(0, 0) = 1.0;
    p.layers[1].weights(0, 0) = 1.0;
    return p;
}

std::vector<Example> random_rows(std::size_t rows, std::size_t d, std::size_t out, Rng& rng) {
    std::vector<Example> batch(rows);
    for (auto& e : batch) {
        for (std::size_t i = 0; i < d; ++i) e.input.push_back(rng.uniform(-1, 1));
        for (std::size_t i = 0; i < out; ++i) e.target.push_back(rng.normal());
    }
    return batch;
}

bool close(double analytic, double numeric) {
    const double diff = std::abs(analytic - numeric);
    return diff <= 1e-7 || diff <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
}

// Checks every gradient coordinate of `p` on `batch` against central differences.
std::size_t gradient_mismatches(NetworkParams p, const std::vector<Example>& batch, const DropoutMasks* masks) {
    const Gradients g = backward(p, batch, masks);
    const Eigen::MatrixXd x = map_examples(p, batch);
    const Eigen::MatrixXd y = stack_targets(batch, p.config.output_dim);
    auto loss = [&] {
        const Eigen::MatrixXd out = forward_mapped(p, x, masks);
        return (out - y).squaredNorm() / static_cast<double>(y.size());
    };
    std::size_t bad = 0;
    oracle::central_differences(p.layers, 1e-5, loss, [&](std::size_t l, bool is_bias, Eigen::Index i, Eigen::Index j, double fd) {
        const double an = is_bias ? g.layers[l].biases(i) : g.layers[l].weights(i, j);
        if (!close(an, fd)) {
            ++bad;
            UNSCOPED_INFO("layer " << l << (is_bias ? " bias " : " weight ") << i << "," << j << ": " << an << " vs " << fd);
        }
    });
    return bad;
}

}  // namespace

TEST_CASE("forward through a unit chain", "[nn][forward]") {
    const auto p = unit_chain();
    CHECK(forward(p, ParamPoint{2.0}) == std::vector<double>{2.0});
    CHECK(forward(p, ParamPoint{-2.0}) == std::vector<double>{0.0});
}

TEST_CASE("forward rejects a dimension mismatch", "[nn][forward]") {
    const auto p = unit_chain();
    CHECK_THROWS_AS(forward(p, ParamPoint{1.0, 2.0}), InvalidInput);
}

TEST_CASE("train mode without dropout equals inference bitwise", "[nn][forward][dropout]") {
    Rng rng(1);
    NetworkConfig cfg{3, {16, 8}, 0.0, 1};
    const auto p = initialize(cfg, InputAffineMap::identity(3), rng);
    for (int i = 0; i < 100; ++i) {
        const ParamPoint x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        CHECK(forward(p, x, ForwardMode::train, static_cast<std::uint64_t>(i)) == forward(p, x));
    }
}

TEST_CASE("input map sends the support onto [-1, 1]", "[nn][forward]") {
    InputAffineMap m{{{0.2, 10.0}, {0.0, 1.0}}};
    CHECK_THAT(m.apply(0, 0.2), WithinAbs(-1.0, 1e-15));
    CHECK_THAT(m.apply(0, 10.0), WithinAbs(1.0, 1e-15));
    CHECK(m.apply(1, 0.5) == 0.0);
    CHECK_THROWS_AS(m.validate(3), InvalidInput);
    InputAffineMap bad{{{1.0, 1.0}}};
    CHECK_THROWS_AS(bad.validate(1), InvalidInput);
}

TEST_CASE("config validation", "[nn][config]") {
    CHECK_THROWS_AS((NetworkConfig{0, {4}, 0.0, 1}.validate()), InvalidInput);
    CHECK_THROWS_AS((NetworkConfig{1, {4, 0}, 0.0, 1}.validate()), InvalidInput);
    CHECK_THROWS_AS((NetworkConfig{1, {4}, 1.0, 1}.validate()), InvalidInput);
    CHECK_NOTHROW((NetworkConfig{2, {40, 40}, 0.1, 1}.validate()));
    CHECK((NetworkConfig{2, {40, 40}, 0.1, 1}.parameter_count()) == 2 * 40 + 40 + 40 * 40 + 40 + 40 + 1);

    TrainConfig t;
    CHECK(t.epochs == 1000);
    CHECK(t.batch_size == 100);
    CHECK(t.learning_rate == 1e-3);
    CHECK(t.rmsprop_decay == 0.9);
    CHECK(t.rmsprop_epsilon == 1e-8);
    CHECK(t.dropout_rate == 0.1);
    t.rmsprop_decay = 1.0;
    CHECK_THROWS_AS(t.validate(), InvalidInput);
}

TEST_CASE("mse_loss", "[nn][loss]") {
    CHECK(mse_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
    CHECK(mse_loss(std::vector<double>{0, 0}, std::vector<double>{1, -1}) == 1.0);
    CHECK(mse_loss(std::vector<double>{0.5}, std::vector<double>{0.0}) == 0.25);
    CHECK_THROWS_AS(mse_loss(std::vector<double>{1, 2}, std::vector<double>{1}), InvalidInput);
    CHECK_THROWS_AS(mse_loss(std::vector<double>{}, std::vector<double>{}), InvalidInput);
}

TEST_CASE("zero network with zero labels has zero gradient", "[nn][backward]") {
    const auto p = zero_network(NetworkConfig{3, {8, 8}, 0.0, 1}, InputAffineMap::identity(3));
    Rng rng(2);
    auto batch = random_rows(10, 3, 1, rng);
    for (auto& e : batch) e.target = {0.0};
    const auto g = backward(p, batch);
    CHECK(g.loss == 0.0);
    for (const auto& l : g.layers) {
        CHECK(l.weights.isZero(0.0));
        CHECK(l.biases.isZero(0.0));
    }
}

TEST_CASE("backward matches finite differences on a 2x[8,8]x1 network", "[nn][backward][oracle]") {
    Rng rng(3);
    const NetworkConfig cfg{2, {8, 8}, 0.0, 1};
    const auto p = initialize(cfg, InputAffineMap::identity(2), rng);
    const auto batch = random_rows(16, 2, 1, rng);
    CHECK(gradient_mismatches(p, batch, nullptr) == 0);
}

TEST_CASE("backward matches finite differences on random architectures", "[nn][backward][property]") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        NetworkConfig cfg;
        cfg.input_dim = 1 + rng.index(4);
        cfg.output_dim = 1 + rng.index(trial % 5 == 0 ? 4 : 1);
        cfg.hidden_widths.clear();
        const std::size_t depth = 1 + rng.index(3);
        for (std::size_t l = 0; l < depth; ++l) cfg.hidden_widths.push_back(1 + rng.index(16));
        cfg.dropout_rate = trial % 2 ? 0.3 : 0.0;
        auto p = initialize(cfg, InputAffineMap::identity(cfg.input_dim), rng);
        for (auto& layer : p.layers) {
            for (Eigen::Index i = 0; i < layer.biases.size(); ++i) layer.biases(i) = 0.1 * rng.normal();
        }
        const auto batch = random_rows(16, cfg.input_dim, cfg.output_dim, rng);
        const DropoutMasks masks = draw_masks(cfg, 16, rng);
        INFO("trial " << trial << " widths " << cfg.describe() << " d=" << cfg.input_dim);
        CHECK(gradient_mismatches(p, batch, &masks) == 0);
    }
}

TEST_CASE("linear chain reproduces the least-squares gradient", "[nn][backward][oracle]") {
    // hidden weight 1 passes positive x unchanged, so yhat = a x
    auto p = unit_chain();
    const double a = 1.3;
    p.layers[1].weights(0, 0) = a;
    std::vector<Example> batch;
    double expected = 0;
    for (int i = 1; i <= 10; ++i) {
        const double x = 0.1 * i;
        batch.push_back({{x}, {2.0 * x}});
        expected += (a * x - 2.0 * x) * x;
    }
    expected = 2.0 * expected / 10.0;
    const auto g = backward(p, batch);
    CHECK_THAT(g.layers[1].weights(0, 0), WithinRel(expected, 1e-12));
}

TEST_CASE("rmsprop_step arithmetic", "[nn][rmsprop]") {
    LayerTensors params{{Eigen::MatrixXd::Constant(1, 1, 0.0), Eigen::VectorXd::Zero(1)}};
    LayerTensors grads{{Eigen::MatrixXd::Constant(1, 1, 3.0), Eigen::VectorXd::Zero(1)}};
    RmsPropState state{{{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 2.0)}}};
    rmsprop_step(state, params, grads, 0.1, 0.9, 1e-8);
    CHECK_THAT(state.mean_square[0].weights(0, 0), WithinAbs(0.9, 1e-15));
    CHECK_THAT(params[0].weights(0, 0), WithinAbs(-0.1 * 3.0 / std::sqrt(0.9 + 1e-8), 1e-15));
    CHECK_THAT(params[0].weights(0, 0), WithinAbs(-0.3162, 1e-4));
    // zero gradient: parameter untouched, state decayed
    CHECK(params[0].biases(0) == 0.0);
    CHECK_THAT(state.mean_square[0].biases(0), WithinAbs(1.8, 1e-15));
}

TEST_CASE("rmsprop descends a quadratic", "[nn][rmsprop][oracle]") {
    LayerTensors x{{Eigen::MatrixXd::Constant(1, 1, 5.0), Eigen::VectorXd::Zero(0)}};
    RmsPropState state{{{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(0)}}};
    for (int step = 0; step < 200; ++step) {
        LayerTensors g{{Eigen::MatrixXd::Constant(1, 1, 2.0 * x[0].weights(0, 0)), Eigen::VectorXd::Zero(0)}};
        rmsprop_step(state, x, g, 0.05, 0.9, 1e-8);
    }
    INFO("x after 200 steps: " << x[0].weights(0, 0));
    CHECK(std::abs(x[0].weights(0, 0)) < 0.1);
}

TEST_CASE("inverted dropout is unbiased for a single hidden layer", "[nn][dropout][property]") {
    Rng rng(6);
    const NetworkConfig cfg{2, {32}, 0.3, 1};
    const auto p = initialize(cfg, InputAffineMap::identity(2), rng);
    const ParamPoint x{0.4, -0.7};
    const double target = forward(p, x)[0];
    const int draws = 10000;
    double sum = 0, sum_sq = 0;
    for (int i = 0; i < draws; ++i) {
        const double y = forward(p, x, ForwardMode::train, derive_seed(99, i))[0];
        sum += y;
        sum_sq += y * y;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / (draws - 1));
    INFO("mean " << mean << " inference " << target << " se " << se);
    CHECK(se > 0.0);
    CHECK(std::abs(mean - target) <= 3.0 * se);
}

TEST_CASE("small learning rate never increases the full-batch loss", "[nn][train][property]") {
    Rng rng(7);
    const NetworkConfig cfg{2, {16, 16}, 0.0, 1};
    auto p = initialize(cfg, InputAffineMap::identity(2), rng);
    auto batch = random_rows(64, 2, 1, rng);
    for (auto& e : batch) e.target = {std::sin(2 * e.input[0]) + e.input[1]};
    RmsPropState state = RmsPropState::for_config(cfg);
    double previous = backward(p, batch).loss;
    for (int step = 0; step < 50; ++step) {
        const auto g = backward(p, batch);
        rmsprop_step(state, p.layers, g.layers, 1e-4, 0.9, 1e-8);
        const double now = backward(p, batch).loss;
        CHECK(now <= previous + 1e-6);
        previous = now;
    }
}

TEST_CASE("constant labels are absorbed starting from a zero output layer", "[nn][train]") {
    Rng rng(8);
    const NetworkConfig cfg{1, {8}, 0.0, 1};
    auto p = initialize(cfg, InputAffineMap::identity(1), rng);
    p.layers.back().weights.setZero();
    std::vector<Example> data;
    for (int i = 0; i < 50; ++i) data.push_back({{rng.uniform(-1, 1)}, {0.7}});
    const double initial = evaluate_mse(p, data);
    CHECK_THAT(initial, WithinAbs(0.49, 1e-15));
    RmsPropState state = RmsPropState::for_config(cfg);
    for (int step = 0; step < 200; ++step) rmsprop_step(state, p.layers, backward(p, data).layers, 1e-2, 0.9, 1e-8);
    CHECK(evaluate_mse(p, data) <= initial);

    TrainConfig tc;
    tc.epochs = 20;
    tc.batch_size = 10;
    const auto r = train(data, {}, cfg, tc, InputAffineMap::identity(1));
    CHECK(r.history.train_mse.size() == 20);
    CHECK(r.history.train_mse.back() <= initial);
    CHECK_FALSE(r.history.validation_mse.has_value());
}

TEST_CASE("network fits a smooth one-dimensional target", "[nn][train][oracle]") {
    Rng rng(9);
    std::vector<Example> data;
    for (int i = 0; i < 500; ++i) {
        const double phi = rng.uniform(0.0, 3.0);
        data.push_back({{phi}, {0.5 + 0.3 * std::sin(phi)}});
    }
    TrainConfig tc;
    tc.seed = 10;
    const auto r = train(data, data, NetworkConfig{1, {40, 40}, tc.dropout_rate, 1}, tc, InputAffineMap{{{0.0, 3.0}}});
    INFO("final training MSE " << r.history.train_mse.back());
    CHECK(r.history.train_mse.size() == 1000);
    CHECK(r.history.train_mse.back() < 1e-3);
    for (double v : r.history.train_mse) CHECK(v >= 0.0);
    REQUIRE(r.history.validation_mse.has_value());
    CHECK(*r.history.validation_mse == r.history.train_mse.back());
}

TEST_CASE("training is bitwise reproducible", "[nn][train]") {
    Rng rng(11);
    auto data = random_rows(120, 2, 1, rng);
    TrainConfig tc;
    tc.epochs = 15;
    tc.seed = 12;
    const NetworkConfig cfg{2, {16, 16}, 0.1, 1};
    const auto a = train(data, {}, cfg, tc, InputAffineMap::identity(2));
    const auto b = train(data, {}, cfg, tc, InputAffineMap::identity(2));
    CHECK(a.params == b.params);
    CHECK(a.history.train_mse == b.history.train_mse);
    tc.seed = 13;
    const auto c = train(data, {}, cfg, tc, InputAffineMap::identity(2));
    CHECK_FALSE(a.params == c.params);
}

TEST_CASE("overflowing labels raise a diverged-training error", "[nn][train]") {
    std::vector<Example> data{{{0.1}, {1e300}}, {{0.2}, {-1e300}}};
    TrainConfig tc;
    tc.epochs = 3;
    try {
        train(data, {}, NetworkConfig{1, {4}, 0.0, 1}, tc, InputAffineMap::identity(1));
        FAIL("expected DivergedTraining");
    } catch (const DivergedTraining& e) {
        CHECK(e.epoch() == 1);
    }
}

TEST_CASE("save and load round trip", "[nn][io]") {
    Rng rng(14);
    const auto p = initialize(NetworkConfig{2, {40, 40}, 0.1, 1}, InputAffineMap{{{0.2, 10.0}, {0.0, 1.0}}}, rng);
    const auto path = std::filesystem::temp_directory_path() / "ensemble_test_nn_roundtrip.json";
    save_params(p, path);
    const auto q = load_params(path);
    CHECK(p == q);
    std::filesystem::remove(path);
}

TEST_CASE("loading a width mismatch is a parse error", "[nn][io]") {
    Rng rng(15);
    const auto p = initialize(NetworkConfig{2, {8, 8}, 0.0, 1}, InputAffineMap::identity(2), rng);
    auto doc = to_json(p);
    doc["config"]["hidden_widths"] = {8, 9};
    CHECK_THROWS_AS(from_json(doc), ParseError);

    const auto path = std::filesystem::temp_directory_path() / "ensemble_test_nn_bad.json";
    std::ofstream(path) << doc.dump();
    CHECK_THROWS_AS(load_params(path), ParseError);
    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(load_params(path), ParseError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_params(path), IoError);
}

TEST_CASE("reference scale-uniform network reproduces its recorded prediction", "[nn][io][golden]") {
    const std::filesystem::path dir = ENSEMBLE_TEST_DATA;
    const auto p = load_params(dir / "scale_uniform_n10.json");
    std::ifstream in(dir / "scale_uniform_n10.prediction.json");
    REQUIRE(in);
    const auto rec = nlohmann::json::parse(in);
    const std::vector<double> input = rec.at("input").get<std::vector<double>>();
    REQUIRE(input == std::vector<double>{1.0, 0.9});
    const double expected = rec.at("prediction").get<double>();
    CHECK(forward(p, ParamPoint(input))[0] == expected);
}
