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

#pragma once

#include "ihreg/cost.hpp"
#include "ihreg/dynamics.hpp"
#include "ihreg/ilqr.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace ihreg {

/// Bad configuration: unknown keys, wrong shapes, invalid values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything needed to reproduce one run. id 1-4 are the bundled
/// swing-up experiments; id 0 is a user-defined run.
struct ExperimentSpec {
    int id = 0;
    std::string model = "pendulum";
    std::map<std::string, double> params;
    Vector x0;
    Vector x_goal;
    double dt = 0.1;
    int total_steps = 150;
    int t_max = 150;
    std::vector<int> t_list = default_t_list();
    std::optional<double> M;  ///< unset: chosen by select_level
    Matrix Q;
    Matrix R;
    IlqrOptions ilqr;
    bool warm_start = true;
    int level_samples = 50;
    std::uint64_t level_seed = 20260101;

    static std::vector<int> default_t_list() {
        std::vector<int> t(40);
        for (int i = 0; i < 40; ++i) t[i] = i + 1;
        return t;
    }

    DynamicsModel make_model() const {
        DynamicsModel m = ihreg::make_model(model, params);
        return x_goal.size() == 0 ? m : m.with_goal(x_goal);
    }

    QuadraticCost cost() const { return QuadraticCost(Q, R); }
};

inline bool operator==(const IlqrOptions& a, const IlqrOptions& b) {
    return a.max_iterations == b.max_iterations && a.convergence_tol == b.convergence_tol &&
           a.reg_init == b.reg_init && a.reg_min == b.reg_min && a.reg_max == b.reg_max &&
           a.reg_increase == b.reg_increase && a.reg_decrease == b.reg_decrease &&
           a.line_search_alphas == b.line_search_alphas && a.fd_eps == b.fd_eps;
}

namespace detail {

inline bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

}  // namespace detail

inline bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
    return a.id == b.id && a.model == b.model && a.params == b.params && detail::same(a.x0, b.x0) &&
           detail::same(a.x_goal, b.x_goal) && a.dt == b.dt && a.total_steps == b.total_steps &&
           a.t_max == b.t_max && a.t_list == b.t_list && a.M == b.M && detail::same(a.Q, b.Q) &&
           detail::same(a.R, b.R) && a.ilqr == b.ilqr && a.warm_start == b.warm_start &&
           a.level_samples == b.level_samples && a.level_seed == b.level_seed;
}

/// Default weights per model: pendulum diag(1, 0.1), cart-pole diag(1, 1, 0.1, 0.1), R = 0.1.
inline void apply_default_weights(ExperimentSpec& spec) {
    const DynamicsModel m = make_model(spec.model, spec.params);
    if (spec.model == "pendulum") {
        spec.Q = Vector((Vector(2) << 1.0, 0.1).finished()).asDiagonal();
    } else if (spec.model == "cartpole") {
        spec.Q = Vector((Vector(4) << 1.0, 1.0, 0.1, 0.1).finished()).asDiagonal();
    } else {
        spec.Q = Matrix::Identity(m.n(), m.n());
    }
    spec.R = 0.1 * Matrix::Identity(m.p(), m.p());
}

/// Table of the four bundled swing-up experiments.
inline ExperimentSpec registry_spec(int id) {
    ExperimentSpec spec;
    spec.id = id;
    constexpr double pi = std::numbers::pi;
    switch (id) {
        case 1:
            spec.model = "cartpole";
            spec.x0 = Vector::Zero(4);
            break;
        case 2:
            spec.model = "cartpole";
            spec.x0 = (Vector(4) << 0.0, 3.0 * pi / 4.0, 0.0, 0.0).finished();
            break;
        case 3:
            spec.model = "pendulum";
            spec.x0 = Vector::Zero(2);
            break;
        case 4:
            spec.model = "pendulum";
            spec.x0 = (Vector(2) << 5.0 * pi / 12.0, 0.0).finished();
            break;
        default:
            throw ConfigError("unknown experiment id " + std::to_string(id) + " (expected 1-4)");
    }
    spec.x_goal = make_model(spec.model).goal();
    apply_default_weights(spec);
    return spec;
}

// ---------------------------------------------------------------------------
// JSON config dialect. Matrices are nested arrays; Q and R also accept a flat
// array holding the diagonal.

namespace detail {

using json = nlohmann::json;

inline Vector vector_from_json(const json& j, const char* key) {
    if (!j.is_array()) throw ConfigError(std::string(key) + ": expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(std::string(key) + ": expected an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline Matrix matrix_from_json(const json& j, const char* key) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(key) + ": expected a non-empty array");
    if (j[0].is_number()) return vector_from_json(j, key).asDiagonal();
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Vector row = vector_from_json(j[static_cast<std::size_t>(r)], key);
        if (row.size() != cols) throw ConfigError(std::string(key) + ": ragged matrix");
        m.row(r) = row.transpose();
    }
    return m;
}

inline json to_json(const Vector& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

inline json to_json(const Matrix& m) {
    json j = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Vector(m.row(r).transpose())));
    return j;
}

template <typename T>
T get_as(const json& j, const char* key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(key) + ": wrong type");
    }
}

inline void check_keys(const json& j, const std::vector<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : j.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

}  // namespace detail

inline nlohmann::json ilqr_options_to_json(const IlqrOptions& o) {
    return {{"max_iterations", o.max_iterations},
            {"convergence_tol", o.convergence_tol},
            {"reg_init", o.reg_init},
            {"reg_min", o.reg_min},
            {"reg_max", o.reg_max},
            {"reg_increase", o.reg_increase},
            {"reg_decrease", o.reg_decrease},
            {"line_search_alphas", o.line_search_alphas},
            {"fd_eps", o.fd_eps}};
}

inline void apply_ilqr_json(IlqrOptions& o, const nlohmann::json& j) {
    detail::check_keys(j,
                       {"max_iterations", "convergence_tol", "reg_init", "reg_min", "reg_max", "reg_increase",
                        "reg_decrease", "line_search_alphas", "fd_eps"},
                       "ilqr");
    if (j.contains("max_iterations")) o.max_iterations = detail::get_as<int>(j["max_iterations"], "max_iterations");
    if (j.contains("convergence_tol")) o.convergence_tol = detail::get_as<double>(j["convergence_tol"], "convergence_tol");
    if (j.contains("reg_init")) o.reg_init = detail::get_as<double>(j["reg_init"], "reg_init");
    if (j.contains("reg_min")) o.reg_min = detail::get_as<double>(j["reg_min"], "reg_min");
    if (j.contains("reg_max")) o.reg_max = detail::get_as<double>(j["reg_max"], "reg_max");
    if (j.contains("reg_increase")) o.reg_increase = detail::get_as<double>(j["reg_increase"], "reg_increase");
    if (j.contains("reg_decrease")) o.reg_decrease = detail::get_as<double>(j["reg_decrease"], "reg_decrease");
    if (j.contains("line_search_alphas")) {
        o.line_search_alphas = detail::get_as<std::vector<double>>(j["line_search_alphas"], "line_search_alphas");
    }
    if (j.contains("fd_eps")) o.fd_eps = detail::get_as<double>(j["fd_eps"], "fd_eps");
}

/// Serializes a spec in the config dialect; spec_from_json inverts it.
inline nlohmann::json spec_to_json(const ExperimentSpec& s) {
    nlohmann::json j;
    j["experiment"] = s.id;
    j["model"] = s.model;
    j["params"] = s.params;
    j["x0"] = detail::to_json(s.x0);
    j["x_goal"] = detail::to_json(s.x_goal);
    j["dt"] = s.dt;
    j["steps"] = s.total_steps;
    j["t_max"] = s.t_max;
    j["t_list"] = s.t_list;
    j["M"] = s.M ? nlohmann::json(*s.M) : nlohmann::json(nullptr);
    j["cost"] = {{"Q", detail::to_json(s.Q)}, {"R", detail::to_json(s.R)}};
    j["ilqr"] = ilqr_options_to_json(s.ilqr);
    j["warm_start"] = s.warm_start;
    j["level_selection"] = {{"samples", s.level_samples}, {"seed", s.level_seed}};
    return j;
}

/**
 * Applies a config document over `base`. A top-level "experiment" key first
 * replaces base with that registry entry; a "model" key that changes the model
 * resets goal and weights to that model's defaults before the remaining keys
 * are applied.
 */
inline ExperimentSpec apply_config(ExperimentSpec base, const nlohmann::json& j) {
    using detail::get_as;
    detail::check_keys(j,
                       {"experiment", "model", "params", "x0", "x_goal", "dt", "steps", "t_max", "t_list", "M",
                        "cost", "ilqr", "warm_start", "level_selection"},
                       "config");
    ExperimentSpec s = std::move(base);
    if (j.contains("experiment")) {
        const int id = get_as<int>(j["experiment"], "experiment");
        if (id != 0) s = registry_spec(id);
        s.id = id;
    }
    if (j.contains("params")) s.params = get_as<std::map<std::string, double>>(j["params"], "params");
    if (j.contains("model")) {
        const auto model = get_as<std::string>(j["model"], "model");
        if (model != s.model || s.Q.size() == 0) {
            s.model = model;
            try {
                s.x_goal = make_model(s.model, s.params).goal();
                apply_default_weights(s);
            } catch (const std::invalid_argument& ex) {
                throw ConfigError(ex.what());
            }
            if (!j.contains("x0")) s.x0.resize(0);
        }
    }
    if (j.contains("x0")) s.x0 = detail::vector_from_json(j["x0"], "x0");
    if (j.contains("x_goal")) s.x_goal = detail::vector_from_json(j["x_goal"], "x_goal");
    if (j.contains("dt")) s.dt = get_as<double>(j["dt"], "dt");
    if (j.contains("steps")) s.total_steps = get_as<int>(j["steps"], "steps");
    if (j.contains("t_max")) s.t_max = get_as<int>(j["t_max"], "t_max");
    if (j.contains("t_list")) s.t_list = get_as<std::vector<int>>(j["t_list"], "t_list");
    if (j.contains("M")) {
        if (j["M"].is_null()) {
            s.M.reset();
        } else {
            s.M = get_as<double>(j["M"], "M");
        }
    }
    if (j.contains("cost")) {
        detail::check_keys(j["cost"], {"Q", "R"}, "cost");
        if (j["cost"].contains("Q")) s.Q = detail::matrix_from_json(j["cost"]["Q"], "Q");
        if (j["cost"].contains("R")) s.R = detail::matrix_from_json(j["cost"]["R"], "R");
    }
    if (j.contains("ilqr")) apply_ilqr_json(s.ilqr, j["ilqr"]);
    if (j.contains("warm_start")) s.warm_start = get_as<bool>(j["warm_start"], "warm_start");
    if (j.contains("level_selection")) {
        const auto& ls = j["level_selection"];
        detail::check_keys(ls, {"samples", "seed"}, "level_selection");
        if (ls.contains("samples")) s.level_samples = get_as<int>(ls["samples"], "samples");
        if (ls.contains("seed")) s.level_seed = get_as<std::uint64_t>(ls["seed"], "seed");
    }
    return s;
}

inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
    ExperimentSpec blank;
    blank.model.clear();
    return apply_config(blank, j);
}

/// Throws ConfigError describing the first inconsistency.
inline void validate(const ExperimentSpec& s) {
    DynamicsModel model = [&] {
        try {
            return s.make_model();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
        }
    }();
    const auto n = model.n();
    const auto p = model.p();
    if (s.x0.size() != n) throw ConfigError("x0 must have " + std::to_string(n) + " entries for " + s.model);
    if (!s.x0.allFinite()) throw ConfigError("x0 must be finite");
    if (s.x_goal.size() != 0 && s.x_goal.size() != n) throw ConfigError("x_goal has the wrong length");
    if (model.derivative(model.goal(), Vector::Zero(p)).norm() > 1e-8) {
        throw ConfigError("x_goal is not an equilibrium of " + s.model + " under zero control");
    }
    if (!(s.dt > 0.0)) throw ConfigError("dt must be positive");
    if (s.total_steps < 1) throw ConfigError("steps must be >= 1");
    if (s.t_max < 1) throw ConfigError("t_max must be >= 1");
    if (s.t_list.empty()) throw ConfigError("t_list must not be empty");
    for (std::size_t i = 0; i < s.t_list.size(); ++i) {
        if (s.t_list[i] < 1 || s.t_list[i] > s.total_steps || (i > 0 && s.t_list[i] <= s.t_list[i - 1])) {
            throw ConfigError("t_list must be strictly ascending within [1, steps]");
        }
    }
    if (s.M && !(*s.M > 0.0)) throw ConfigError("M must be positive");
    if (s.level_samples < 1) throw ConfigError("level_selection.samples must be >= 1");
    if (s.Q.rows() != n || s.Q.cols() != n) throw ConfigError("Q must be " + std::to_string(n) + "x" + std::to_string(n));
    if (s.R.rows() != p || s.R.cols() != p) throw ConfigError("R must be " + std::to_string(p) + "x" + std::to_string(p));
    try {
        (void)s.cost();
        s.ilqr.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
}

}  // namespace ihreg
