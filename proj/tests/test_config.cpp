/*
 Copyright 2026 The ihreg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "ihreg/config.hpp"
#include "ihreg/experiment.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <ostream>

namespace ihreg {
namespace {

using nlohmann::json;
using testing::vec;
constexpr double kPi = std::numbers::pi;

TEST(Registry, PreloadsTheFourExperiments) {
    const ExperimentSpec e1 = registry_spec(1);
    EXPECT_EQ(e1.model, "cartpole");
    EXPECT_EQ(e1.x0, vec({0, 0, 0, 0}));
    EXPECT_EQ(e1.x_goal, vec({0, kPi, 0, 0}));
    const ExperimentSpec e2 = registry_spec(2);
    EXPECT_EQ(e2.model, "cartpole");
    EXPECT_EQ(e2.x0, vec({0, 3 * kPi / 4, 0, 0}));
    const ExperimentSpec e3 = registry_spec(3);
    EXPECT_EQ(e3.model, "pendulum");
    EXPECT_EQ(e3.x0, vec({0, 0}));
    EXPECT_EQ(e3.x_goal, vec({kPi, 0}));
    const ExperimentSpec e4 = registry_spec(4);
    EXPECT_EQ(e4.x0, vec({5 * kPi / 12, 0}));
    for (int id = 1; id <= 4; ++id) {
        const ExperimentSpec s = registry_spec(id);
        EXPECT_EQ(s.id, id);
        EXPECT_EQ(s.dt, 0.1);
        EXPECT_EQ(s.total_steps, 150);
        EXPECT_EQ(s.t_list.size(), 40u);
        EXPECT_EQ(s.t_list.front(), 1);
        EXPECT_EQ(s.t_list.back(), 40);
        EXPECT_FALSE(s.M.has_value());
        EXPECT_NO_THROW(validate(s));
    }
    EXPECT_THROW(registry_spec(0), ConfigError);
    EXPECT_THROW(registry_spec(5), ConfigError);
}

TEST(Registry, DefaultWeights) {
    const ExperimentSpec p = registry_spec(3);
    EXPECT_EQ(p.Q.diagonal(), vec({1.0, 0.1}));
    EXPECT_EQ(p.R(0, 0), 0.1);
    const ExperimentSpec c = registry_spec(1);
    EXPECT_EQ(c.Q.diagonal(), vec({1.0, 1.0, 0.1, 0.1}));
    EXPECT_EQ(c.R(0, 0), 0.1);
}

TEST(SpecJson, RoundTrips) {
    for (int id = 1; id <= 4; ++id) {
        ExperimentSpec s = registry_spec(id);
        EXPECT_EQ(spec_from_json(spec_to_json(s)), s);
        EXPECT_EQ(spec_from_json(json::parse(spec_to_json(s).dump())), s);
    }
    ExperimentSpec s = registry_spec(2);
    s.M = 0.37;
    s.params = {{"pole_mass", 0.15}, {"gravity", 9.8}};
    s.Q(0, 1) = s.Q(1, 0) = 0.05;
    s.t_list = {2, 4, 8};
    s.ilqr.max_iterations = 77;
    s.ilqr.line_search_alphas = {1.0, 0.3};
    s.warm_start = false;
    s.level_seed = 42;
    EXPECT_EQ(spec_from_json(json::parse(spec_to_json(s).dump())), s);
}

TEST(SpecJson, EmptyParamsSerializeAsObject) {
    EXPECT_TRUE(spec_to_json(registry_spec(1))["params"].is_object());
}

TEST(SpecJson, MatricesAsNestedArraysOrDiagonal) {
    const ExperimentSpec a = apply_config(registry_spec(3), json{{"cost", {{"Q", {{2.0, 0.5}, {0.5, 1.0}}}}}});
    EXPECT_EQ(a.Q(0, 1), 0.5);
    EXPECT_EQ(a.Q(1, 1), 1.0);
    const ExperimentSpec b = apply_config(registry_spec(3), json{{"cost", {{"Q", {3.0, 4.0}}, {"R", {0.5}}}}});
    EXPECT_EQ(b.Q(0, 0), 3.0);
    EXPECT_EQ(b.Q(0, 1), 0.0);
    EXPECT_EQ(b.R(0, 0), 0.5);
}

TEST(SpecJson, RejectsMalformedDocuments) {
    EXPECT_THROW(apply_config(registry_spec(3), json{{"bogus", 1}}), ConfigError);
    EXPECT_THROW(apply_config(registry_spec(3), json{{"dt", "fast"}}), ConfigError);
    EXPECT_THROW(apply_config(registry_spec(3), json{{"x0", 1.0}}), ConfigError);
    EXPECT_THROW(apply_config(registry_spec(3), json{{"model", "acrobot"}}), ConfigError);
    EXPECT_THROW(apply_config(registry_spec(3), json{{"ilqr", {{"alpha", 1}}}}), ConfigError);
    EXPECT_THROW(apply_config(registry_spec(3), json{{"cost", {{"Q", {{1.0, 2.0}, {3.0}}}}}}), ConfigError);
}

TEST(Validate, CatchesInconsistencies) {
    auto bad = [](auto mutate) {
        ExperimentSpec s = registry_spec(3);
        mutate(s);
        return s;
    };
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.x0 = vec({1.0}); })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.x0 = vec({NAN, 0.0}); })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.x_goal = vec({1.0, 0.0}); })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.dt = 0.0; })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.total_steps = 0; })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.t_max = 0; })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.t_list = {3, 2}; })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.t_list = {151}; })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.M = -1.0; })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.Q = Matrix::Identity(3, 3); })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.R = Matrix::Zero(1, 1); })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.ilqr.reg_init = 0.0; })), ConfigError);
    EXPECT_THROW(validate(bad([](ExperimentSpec& s) { s.params = {{"mass", 0.0}}; })), ConfigError);
}

TEST(Validate, AlternateGoalMustBeEquilibrium) {
    ExperimentSpec s = registry_spec(3);
    s.x_goal = vec({-kPi, 0.0});
    EXPECT_NO_THROW(validate(s));
}

// Each field can be set by the registry (R), the config file (C) or a flag
// (F); the highest present layer wins.
struct Layer {
    bool config;
    bool flag;
};

void PrintTo(const Layer& l, std::ostream* os) { *os << (l.config ? "config" : "-") << "/" << (l.flag ? "flag" : "-"); }

class Precedence : public ::testing::TestWithParam<Layer> {};

TEST_P(Precedence, HighestLayerWins) {
    const Layer l = GetParam();
    const ExperimentSpec reg = registry_spec(4);
    SpecOverrides cli;
    cli.experiment = 4;
    json cfg = json::object();
    if (l.config) {
        cfg = {{"x0", {0.5, 0.0}}, {"M", 3.0}, {"dt", 0.05}, {"steps", 120}, {"t_max", 90}, {"warm_start", true}};
    }
    if (l.flag) {
        cli.x0 = std::vector<double>{0.25, 0.1};
        cli.M = 7.0;
        cli.dt = 0.08;
        cli.steps = 100;
        cli.t_max = 60;
        cli.no_warm_start = true;
    }
    const ExperimentSpec s = resolve_spec(cli, cfg);
    if (l.flag) {
        EXPECT_EQ(s.x0, vec({0.25, 0.1}));
        EXPECT_EQ(s.M, 7.0);
        EXPECT_EQ(s.dt, 0.08);
        EXPECT_EQ(s.total_steps, 100);
        EXPECT_EQ(s.t_max, 60);
        EXPECT_FALSE(s.warm_start);
    } else if (l.config) {
        EXPECT_EQ(s.x0, vec({0.5, 0.0}));
        EXPECT_EQ(s.M, 3.0);
        EXPECT_EQ(s.dt, 0.05);
        EXPECT_EQ(s.total_steps, 120);
        EXPECT_EQ(s.t_max, 90);
        EXPECT_TRUE(s.warm_start);
    } else {
        EXPECT_EQ(s, reg);
    }
    EXPECT_EQ(s.id, 4);
    EXPECT_EQ(s.model, "pendulum");
}

INSTANTIATE_TEST_SUITE_P(Matrix, Precedence,
                         ::testing::Values(Layer{false, false}, Layer{true, false}, Layer{false, true},
                                           Layer{true, true}),
                         [](const auto& info) {
                             return std::string(info.param.config ? "Config" : "NoConfig") +
                                    (info.param.flag ? "Flag" : "NoFlag");
                         });

TEST(PrecedenceDetail, FieldsMixAcrossLayers) {
    SpecOverrides cli;
    cli.experiment = 3;
    cli.dt = 0.2;
    const ExperimentSpec s = resolve_spec(cli, json{{"M", 4.0}, {"dt", 0.05}});
    EXPECT_EQ(s.dt, 0.2);
    EXPECT_EQ(s.M, 4.0);
    EXPECT_EQ(s.x0, registry_spec(3).x0);
}

TEST(PrecedenceDetail, CliExperimentBeatsConfigExperiment) {
    SpecOverrides cli;
    cli.experiment = 1;
    const ExperimentSpec s = resolve_spec(cli, json{{"experiment", 3}});
    EXPECT_EQ(s.id, 1);
    EXPECT_EQ(s.model, "cartpole");
}

TEST(PrecedenceDetail, ConfigExperimentWithoutCli) {
    const ExperimentSpec s = resolve_spec({}, json{{"experiment", 2}, {"M", 1.0}});
    ExperimentSpec want = registry_spec(2);
    want.M = 1.0;
    EXPECT_EQ(s, want);
}

TEST(PrecedenceDetail, ModelFlagResetsGoalAndWeights) {
    SpecOverrides cli;
    cli.experiment = 3;
    cli.model = "cartpole";
    const ExperimentSpec s = resolve_spec(cli);
    EXPECT_EQ(s.model, "cartpole");
    EXPECT_EQ(s.x_goal, vec({0, kPi, 0, 0}));
    EXPECT_EQ(s.Q.rows(), 4);
    EXPECT_EQ(s.x0, Vector::Zero(4));
    EXPECT_NO_THROW(validate(s));
}

TEST(PrecedenceDetail, DefaultsWithoutExperiment) {
    const ExperimentSpec s = resolve_spec({});
    EXPECT_EQ(s.model, "pendulum");
    EXPECT_EQ(s.x0, vec({0, 0}));
    EXPECT_EQ(s.Q, registry_spec(3).Q);
    EXPECT_NO_THROW(validate(s));
}

TEST(PrecedenceDetail, NullMInConfigRestoresAutomaticSelection) {
    SpecOverrides cli;
    cli.experiment = 3;
    EXPECT_FALSE(resolve_spec(cli, json{{"M", nullptr}}).M.has_value());
    EXPECT_THROW(resolve_spec(cli, json::array()), ConfigError);
}

}  // namespace
}  // namespace ihreg
