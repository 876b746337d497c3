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

#include "ihreg/config.hpp"
#include "ihreg/io.hpp"
#include "ihreg/regularizer.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ihreg {

inline constexpr const char* kToolName = "ihreg";
inline constexpr const char* kToolVersion = "1.0.0";

struct RiccatiSummary {
    Matrix P;
    Matrix K;
    long iterations = 0;
    double residual = 0.0;
    double closed_loop_radius = 0.0;
};

struct SurrogateSummary {
    double cost = 0.0;
    bool converged = false;
    std::string init;
    bool operator==(const SurrogateSummary&) const = default;
};

struct SolutionSummary {
    int T_star = 0;
    bool hit = false;
    double J_M = 0.0;
    double transfer_cost = 0.0;
    double expected_regulation_cost = 0.0;
    double actual_regulation_cost = 0.0;
    double total_composite_cost = 0.0;
    bool regulation_diverged = false;
    long regulation_time = 0;
    std::vector<HorizonProbe> probes;
    bool operator==(const SolutionSummary&) const = default;

    static SolutionSummary from(const RegularizedSolution& s) {
        return {s.T_star,
                s.hit,
                s.J_M,
                s.transfer_cost,
                s.expected_regulation_cost,
                s.actual_regulation_cost,
                s.total_composite_cost,
                s.regulation_diverged,
                s.regulation_time,
                s.probes};
    }
};

struct RegulationSummary {
    double cost = 0.0;
    bool diverged = false;
    double final_error = 0.0;
    bool operator==(const RegulationSummary&) const = default;
};

/// Everything written to solution.json.
struct RunResult {
    std::string stage;  ///< experiment, sweep, solve or regulate
    ExperimentSpec spec;
    double M = 0.0;
    bool M_selected = false;  ///< true when M came from select_level
    RiccatiSummary riccati;
    std::vector<SweepRecord> sweep;
    std::optional<SurrogateSummary> surrogate;
    std::optional<SolutionSummary> solution;
    std::optional<RegulationSummary> regulation;
    std::optional<PhasedTrajectory> composite;
    bool diagnostics = false;  ///< sweep records carry solver histories
    std::string tool = kToolName;
    std::string version = kToolVersion;
};

inline bool operator==(const RiccatiSummary& a, const RiccatiSummary& b) {
    return detail::same(a.P, b.P) && detail::same(a.K, b.K) && a.iterations == b.iterations &&
           a.residual == b.residual && a.closed_loop_radius == b.closed_loop_radius;
}

namespace detail {

/// Non-finite values are stored as strings so that they survive JSON.
inline nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double num_from(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw IoError("expected a number in result JSON");
}

}  // namespace detail

inline bool operator==(const RunResult& a, const RunResult& b) {
    return a.stage == b.stage && a.spec == b.spec && a.M == b.M && a.M_selected == b.M_selected &&
           a.riccati == b.riccati && a.sweep == b.sweep && a.surrogate == b.surrogate &&
           a.solution == b.solution && a.regulation == b.regulation && a.composite == b.composite &&
           a.diagnostics == b.diagnostics && a.tool == b.tool && a.version == b.version;
}

inline nlohmann::json to_json(const RunResult& r) {
    using nlohmann::json;
    using detail::num;
    json j;
    j["tool"] = r.tool;
    j["version"] = r.version;
    j["stage"] = r.stage;
    j["spec"] = spec_to_json(r.spec);
    j["M"] = r.M;
    j["M_selected"] = r.M_selected;
    j["riccati"] = {{"P", detail::to_json(r.riccati.P)},
                    {"K", detail::to_json(r.riccati.K)},
                    {"iterations", r.riccati.iterations},
                    {"residual", r.riccati.residual},
                    {"closed_loop_radius", r.riccati.closed_loop_radius}};
    j["diagnostics"] = r.diagnostics;
    json rows = json::array();
    for (const auto& s : r.sweep) {
        json row = {{"T", s.T},
                    {"fh_cost", num(s.fh_cost)},
                    {"transfer_cost", num(s.transfer_cost)},
                    {"expected_regulation_cost", num(s.expected_regulation_cost)},
                    {"actual_regulation_cost", num(s.actual_regulation_cost)},
                    {"total_composite_cost", num(s.total_composite_cost)},
                    {"terminal_error", num(s.terminal_error)},
                    {"hit_omega", s.hit_omega},
                    {"solver_iterations", s.solver_iterations},
                    {"converged", s.converged},
                    {"failed", s.failed},
                    {"error", s.error},
                    {"init", s.init}};
        if (r.diagnostics) {
            row["cost_history"] = s.cost_history;
            row["reg_history"] = s.reg_history;
        }
        rows.push_back(std::move(row));
    }
    j["sweep"] = std::move(rows);
    j["surrogate"] = r.surrogate ? json{{"cost", num(r.surrogate->cost)},
                                        {"converged", r.surrogate->converged},
                                        {"init", r.surrogate->init}}
                                 : json(nullptr);
    if (r.solution) {
        const auto& s = *r.solution;
        json probes = json::array();
        for (const auto& p : s.probes) {
            probes.push_back({{"T", p.T},
                              {"fh_cost", num(p.fh_cost)},
                              {"terminal_value", num(p.terminal_value)},
                              {"converged", p.converged},
                              {"iterations", p.iterations},
                              {"init", p.init}});
        }
        j["solution"] = {{"T_star", s.T_star},
                         {"hit", s.hit},
                         {"J_M", num(s.J_M)},
                         {"transfer_cost", num(s.transfer_cost)},
                         {"expected_regulation_cost", num(s.expected_regulation_cost)},
                         {"actual_regulation_cost", num(s.actual_regulation_cost)},
                         {"total_composite_cost", num(s.total_composite_cost)},
                         {"regulation_diverged", s.regulation_diverged},
                         {"regulation_time", s.regulation_time},
                         {"probes", std::move(probes)}};
    } else {
        j["solution"] = nullptr;
    }
    j["regulation"] = r.regulation ? json{{"cost", num(r.regulation->cost)},
                                          {"diverged", r.regulation->diverged},
                                          {"final_error", num(r.regulation->final_error)}}
                                   : json(nullptr);
    if (r.composite) {
        json states = json::array();
        json controls = json::array();
        for (const auto& x : r.composite->states) states.push_back(detail::to_json(x));
        for (const auto& u : r.composite->controls) controls.push_back(detail::to_json(u));
        j["composite"] = {{"transfer_steps", r.composite->transfer_steps},
                          {"states", std::move(states)},
                          {"controls", std::move(controls)}};
    } else {
        j["composite"] = nullptr;
    }
    return j;
}

inline RunResult run_result_from_json(const nlohmann::json& j) {
    using detail::num_from;
    try {
        RunResult r;
        r.tool = j.at("tool").get<std::string>();
        r.version = j.at("version").get<std::string>();
        r.stage = j.at("stage").get<std::string>();
        r.spec = spec_from_json(j.at("spec"));
        r.M = j.at("M").get<double>();
        r.M_selected = j.at("M_selected").get<bool>();
        const auto& ric = j.at("riccati");
        r.riccati.P = detail::matrix_from_json(ric.at("P"), "P");
        r.riccati.K = detail::matrix_from_json(ric.at("K"), "K");
        r.riccati.iterations = ric.at("iterations").get<long>();
        r.riccati.residual = ric.at("residual").get<double>();
        r.riccati.closed_loop_radius = ric.at("closed_loop_radius").get<double>();
        r.diagnostics = j.at("diagnostics").get<bool>();
        for (const auto& row : j.at("sweep")) {
            SweepRecord s;
            s.T = row.at("T").get<int>();
            s.fh_cost = num_from(row.at("fh_cost"));
            s.transfer_cost = num_from(row.at("transfer_cost"));
            s.expected_regulation_cost = num_from(row.at("expected_regulation_cost"));
            s.actual_regulation_cost = num_from(row.at("actual_regulation_cost"));
            s.total_composite_cost = num_from(row.at("total_composite_cost"));
            s.terminal_error = num_from(row.at("terminal_error"));
            s.hit_omega = row.at("hit_omega").get<bool>();
            s.solver_iterations = row.at("solver_iterations").get<int>();
            s.converged = row.at("converged").get<bool>();
            s.failed = row.at("failed").get<bool>();
            s.error = row.at("error").get<std::string>();
            s.init = row.at("init").get<std::string>();
            if (row.contains("cost_history")) s.cost_history = row["cost_history"].get<std::vector<double>>();
            if (row.contains("reg_history")) s.reg_history = row["reg_history"].get<std::vector<double>>();
            r.sweep.push_back(std::move(s));
        }
        if (const auto& s = j.at("surrogate"); !s.is_null()) {
            r.surrogate = SurrogateSummary{num_from(s.at("cost")), s.at("converged").get<bool>(),
                                           s.at("init").get<std::string>()};
        }
        if (const auto& s = j.at("solution"); !s.is_null()) {
            SolutionSummary out;
            out.T_star = s.at("T_star").get<int>();
            out.hit = s.at("hit").get<bool>();
            out.J_M = num_from(s.at("J_M"));
            out.transfer_cost = num_from(s.at("transfer_cost"));
            out.expected_regulation_cost = num_from(s.at("expected_regulation_cost"));
            out.actual_regulation_cost = num_from(s.at("actual_regulation_cost"));
            out.total_composite_cost = num_from(s.at("total_composite_cost"));
            out.regulation_diverged = s.at("regulation_diverged").get<bool>();
            out.regulation_time = s.at("regulation_time").get<long>();
            for (const auto& p : s.at("probes")) {
                out.probes.push_back({p.at("T").get<int>(), num_from(p.at("fh_cost")),
                                      num_from(p.at("terminal_value")), p.at("converged").get<bool>(),
                                      p.at("iterations").get<int>(), p.at("init").get<std::string>()});
            }
            r.solution = std::move(out);
        }
        if (const auto& s = j.at("regulation"); !s.is_null()) {
            r.regulation = RegulationSummary{num_from(s.at("cost")), s.at("diverged").get<bool>(),
                                             num_from(s.at("final_error"))};
        }
        if (const auto& c = j.at("composite"); !c.is_null()) {
            PhasedTrajectory tr;
            tr.transfer_steps = c.at("transfer_steps").get<int>();
            for (const auto& x : c.at("states")) tr.states.push_back(detail::vector_from_json(x, "states"));
            for (const auto& u : c.at("controls")) tr.controls.push_back(detail::vector_from_json(u, "controls"));
            r.composite = std::move(tr);
        }
        return r;
    } catch (const nlohmann::json::exception& ex) {
        throw IoError(std::string("malformed result JSON: ") + ex.what());
    } catch (const ConfigError& ex) {
        throw IoError(std::string("malformed spec in result JSON: ") + ex.what());
    }
}

inline void emit_json(const RunResult& r, const std::filesystem::path& path) {
    write_file_atomic(path, to_json(r).dump(2) + "\n");
}

inline RunResult read_result_json(const std::filesystem::path& path) {
    try {
        return run_result_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& ex) {
        throw IoError(path.string() + ": " + ex.what());
    }
}

}  // namespace ihreg
