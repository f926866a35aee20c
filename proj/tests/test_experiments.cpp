#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"

#include "ensemble/experiments.hpp"

using namespace ensemble;

namespace {

StudyConfig tiny_config(std::uint64_t seed = 1) {
    StudyConfig c;
    c.M = 20;
    c.N = 200;
    c.R = 1000;
    c.seed = seed;
    c.train.epochs = 3;
    return c;
}

void check_unbiased(const ReplicateMetrics& m) {
    INFO(m.scenario << " " << m.label() << " bias " << m.bias << " sd " << m.sd);
    CHECK(std::abs(m.bias) <= 4.0 * m.sd / std::sqrt(static_cast<double>(m.R)));
}

}  // namespace

TEST_CASE("scenario grids", "[experiments]") {
    const auto t1 = table1_scenarios();
    CHECK(t1.size() == 12);
    std::set<std::string> names;
    for (const auto& s : t1) names.insert(table1_name(s.n, s.k, s.theta));
    CHECK(names.size() == 12);
    CHECK(names.count("n=10;k=0.9;theta=1") == 1);

    const auto t2 = table2_scenarios();
    REQUIRE(t2.size() == 12);
    CHECK(t2[0].phi == std::vector<double>{0.2, 0.2, 0.2, 0.2});
    CHECK(t2[1].phi == std::vector<double>{0.2, 0.2, 0.2, -0.2});
    CHECK(t2[11].phi == std::vector<double>{-1.2, -1.2, -1.2, -1.2});
    CHECK(t2[0].name == "theta=(0.2;0.2;0.2;0.2)");

    const auto t3 = table3_scenarios();
    REQUIRE(t3.size() == 13);
    for (std::size_t i = 0; i < 4; ++i) CHECK(t3[i].phi[1] == 0.0);
    CHECK(t3[4].name == "theta1=0.42;theta=0.1");
    CHECK(t3[12].phi == std::vector<double>{0.52, 0.14});

    const auto thetas = PowerStudyConfig{}.theta_grid();
    REQUIRE(thetas.size() == 26);
    CHECK(thetas.front() == 0.0);
    CHECK(thetas.back() == 0.25);
}

TEST_CASE("study configuration", "[experiments][config]") {
    const auto desk = StudyConfig::preset(Scale::desk);
    CHECK(desk.M == 200);
    CHECK(desk.N == 10000);
    CHECK(desk.R == 200000);
    const auto paper = StudyConfig::preset(parse_scale("paper"));
    CHECK(paper.M == 1000);
    CHECK(paper.N == 1000000);
    CHECK(paper.R == 1000000);
    CHECK_THROWS_AS(parse_scale("huge"), InvalidInput);
    CHECK(std::string(to_string(Scale::paper)) == "paper");

    CHECK_NOTHROW(tiny_config().validate());
    auto c = tiny_config();
    c.R = 999;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = tiny_config();
    c.N = 99;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = tiny_config();
    c.M = 4;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = tiny_config();
    c.threads = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = tiny_config();
    c.train.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    CHECK(default_label_rule(models::HetRegression::id()) == LabelRule::centered);
    CHECK(default_label_rule(models::ScaleUniform::id()) == LabelRule::centered);
    CHECK(default_label_rule(models::AdaptiveTrial::id()) == LabelRule::raw_moments);

    const auto j = to_json(tiny_config());
    CHECK(j.at("M") == 20);
    CHECK(j.at("R") == 1000);
    CHECK(j.at("label_rule") == "model-default");
    CHECK(j.at("train").at("epochs") == 3);
}

TEST_CASE("scale-uniform study smoke run", "[experiments][table1]") {
    const auto cfg = tiny_config(2);
    const std::vector<Table1Scenario> scen{{2, 0.1, 0.5}, {10, 0.9, 1.0}};
    const auto r = table1_study(cfg, scen);
    REQUIRE(r.scenarios.size() == 2);
    CHECK(r.networks.contains("n=2"));
    CHECK(r.networks.contains("n=10"));
    CHECK(r.networks.at("n=2").at("label_rule") == "centered");
    const auto rows = r.rows();
    CHECK(rows.size() == 8);
    for (const auto& s : r.scenarios) {
        CHECK(s.failed == 0);
        for (const char* id : {"U", "RB", "M", "E"}) CHECK(s.get(id).R == cfg.R);
        check_unbiased(s.get("RB"));
        check_unbiased(s.get("M"));
        check_unbiased(s.get("E"));
        CHECK(s.re("U", "U") == 1.0);
        CHECK(std::isfinite(s.get("U").mean));
    }
    CHECK(r.scenario("n=10;k=0.9;theta=1").get("U").truth == 1.0);
    CHECK_THROWS_AS(r.scenario("n=3"), InvalidInput);

    // same seed, same numbers
    const auto again = table1_study(cfg, scen);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again.rows()[i].mean == rows[i].mean);
        CHECK(again.rows()[i].variance == rows[i].variance);
    }
}

TEST_CASE("regression study smoke run", "[experiments][table2]") {
    auto cfg = tiny_config(3);
    const auto all = table2_scenarios();
    const std::vector<Scenario> scen{all[0], all[5]};
    const auto r = table2_study(cfg, scen);
    REQUIRE(r.scenarios.size() == 2);
    CHECK(r.networks.at("regression").at("label_rule") == "centered");
    for (const auto& s : r.scenarios) {
        CHECK(s.metrics.size() == 12);  // 3 estimators x 4 coordinates
        for (std::size_t j = 0; j < 4; ++j) {
            check_unbiased(s.get("L", j));
            CHECK(s.get("U", j).label() == "U_" + std::to_string(j + 1));
        }
    }
}

TEST_CASE("trial study and power smoke run", "[experiments][table3][power]") {
    auto cfg = tiny_config(4);
    cfg.R = 2000;
    const auto net = train_trial_network(cfg);
    CHECK(net.data.size() == cfg.M);
    CHECK(net.params.config.input_dim == 2);

    const auto all = table3_scenarios();
    const auto r = table3_study(cfg, {all[0], all[8]}, &net);
    REQUIRE(r.scenarios.size() == 2);
    for (const auto& s : r.scenarios) {
        CHECK(s.metrics.size() == 4);
        check_unbiased(s.get("tilde_0.5"));
        check_unbiased(s.get("tilde_0.8"));
    }

    PowerStudyConfig pc;
    pc.thetas = {0.0, 0.25};
    const auto p = power_study(cfg, pc, &net);
    REQUIRE(p.critical_values.size() == 4);
    REQUIRE(p.validation_type1.size() == 4);
    CHECK(p.validation_R == cfg.R);
    for (std::size_t e = 0; e < 4; ++e) {
        const auto& c = p.critical_values[e];
        CHECK(c.null_rejection.size() == 4);
        for (double q : c.null_rejection) CHECK(q <= pc.alpha);
        CHECK(p.validation_type1[e].size() == 4);
        CHECK((c.critical_value >= 0.0 && c.critical_value <= 0.2));
    }
    REQUIRE(p.curve.has_value());
    const auto& curve = *p.curve;
    CHECK(curve.thetas == pc.thetas);
    for (std::size_t e = 0; e < 4; ++e) {
        CHECK(curve.power(0, e) <= pc.alpha + 3.0 * std::sqrt(pc.alpha * (1 - pc.alpha) / cfg.R) + 0.02);
        CHECK(curve.power(1, e) > 0.9);
    }
    CHECK(p.critical_value("tilde_0.8") == p.critical_values[3].critical_value);
    CHECK_THROWS_AS(p.critical_value("nope"), InvalidInput);
    const auto j = to_json(p);
    CHECK(j.at("critical_values").size() == 4);
    CHECK(j.at("critical_values")[0].at("validation_type1").size() == 4);

    const auto no_curve = power_study(cfg, pc, &net, false);
    CHECK_FALSE(no_curve.curve.has_value());
    CHECK(no_curve.critical_values[0].critical_value == p.critical_values[0].critical_value);
}
