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
#include "ihreg/result.hpp"
#include "ihreg/riccati.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ihreg {

struct RunOptions {
    bool emit_trajectories = false;  ///< per-horizon composite CSVs and the composite in JSON
    bool diagnostics = false;        ///< solver histories in JSON
};

/// Values given on the command line; unset members leave lower layers alone.
struct SpecOverrides {
    std::optional<int> experiment;
    std::optional<std::string> model;
    std::optional<std::vector<double>> x0;
    std::optional<double> M;
    std::optional<double> dt;
    std::optional<int> steps;
    std::optional<int> t_max;
    bool no_warm_start = false;
};

/**
 * Builds the effective spec: registry entry (or pendulum defaults), then the
 * config document, then command-line overrides. An experiment id given on the
 * command line wins over one named in the config. A missing x0 defaults to the
 * model's origin.
 */
inline ExperimentSpec resolve_spec(const SpecOverrides& cli, const std::optional<nlohmann::json>& config = {}) {
    ExperimentSpec s = apply_config(ExperimentSpec{}, nlohmann::json{{"model", "pendulum"}});
    if (cli.experiment) s = registry_spec(*cli.experiment);
    if (config) {
        if (!config->is_object()) throw ConfigError("config must be a JSON object");
        nlohmann::json doc = *config;
        if (cli.experiment) doc.erase("experiment");
        s = apply_config(std::move(s), doc);
    }
    nlohmann::json flags = nlohmann::json::object();
    if (cli.model) flags["model"] = *cli.model;
    if (cli.x0) flags["x0"] = *cli.x0;
    if (cli.M) flags["M"] = *cli.M;
    if (cli.dt) flags["dt"] = *cli.dt;
    if (cli.steps) flags["steps"] = *cli.steps;
    if (cli.t_max) flags["t_max"] = *cli.t_max;
    if (cli.no_warm_start) flags["warm_start"] = false;
    s = apply_config(std::move(s), flags);
    if (s.x0.size() == 0) {
        try {
            s.x0 = Vector::Zero(s.make_model().n());
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
        }
    }
    return s;
}

/// Model, cost, Riccati terminal data and level shared by every stage.
struct PreparedRun {
    DynamicsModel model;
    QuadraticCost cost;
    RiccatiSolution riccati;
    double M = 0.0;
    bool M_selected = false;
};

inline PreparedRun prepare_run(const ExperimentSpec& spec) {
    validate(spec);
    DynamicsModel model = spec.make_model();
    QuadraticCost cost = spec.cost();
    RiccatiSolution ric = solve_dare(linearize_discrete(model, spec.dt), cost);
    PreparedRun run{std::move(model), std::move(cost), std::move(ric), 0.0, false};
    if (spec.M) {
        run.M = *spec.M;
    } else {
        run.M = select_level(run.model, run.cost, run.riccati, spec.dt, default_level_candidates(),
                             spec.level_samples, spec.total_steps, 1e-3, spec.level_seed);
        run.M_selected = true;
    }
    return run;
}

namespace detail {

inline RunResult base_result(const std::string& stage, const ExperimentSpec& spec, const PreparedRun& run,
                             const RunOptions& opts) {
    RunResult r;
    r.stage = stage;
    r.spec = spec;
    r.M = run.M;
    r.M_selected = run.M_selected;
    r.riccati = {run.riccati.P, run.riccati.K, run.riccati.iterations, run.riccati.residual,
                 run.riccati.closed_loop_radius};
    r.diagnostics = opts.diagnostics;
    return r;
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
}

inline PhasedTrajectory phased(const Trajectory& tr, int transfer_steps) {
    return {tr.states, tr.controls, transfer_steps};
}

inline void run_sweep_stage(RunResult& r, const ExperimentSpec& spec, const PreparedRun& run,
                            const std::filesystem::path& out_dir, const RunOptions& opts) {
    SweepResult sweep = horizon_sweep(run.model, run.cost, run.riccati, spec.x0, spec.t_list, spec.total_steps,
                                      spec.dt, run.M, spec.ilqr, spec.warm_start);
    if (!opts.diagnostics) {
        for (auto& rec : sweep.records) {
            rec.cost_history.clear();
            rec.reg_history.clear();
        }
    }
    r.sweep = sweep.records;
    r.surrogate = SurrogateSummary{sweep.surrogate_cost, sweep.surrogate_converged, sweep.surrogate_init};
    emit_csv(sweep.records, out_dir / "sweep.csv");
    if (opts.emit_trajectories) {
        for (std::size_t i = 0; i < sweep.records.size(); ++i) {
            if (sweep.composites[i].states.empty()) continue;
            const int T = sweep.records[i].T;
            emit_trajectory_csv(phased(sweep.composites[i], T), run.model.n(), run.model.p(),
                                out_dir / ("trajectory_T" + std::to_string(T) + ".csv"));
        }
        emit_trajectory_csv(phased(sweep.surrogate, static_cast<int>(sweep.surrogate.horizon())), run.model.n(),
                            run.model.p(), out_dir / "surrogate_trajectory.csv");
    }
}

inline void run_solve_stage(RunResult& r, const ExperimentSpec& spec, const PreparedRun& run,
                            const std::filesystem::path& out_dir, const RunOptions& opts) {
    const RegularizedSolution sol = solve_free_final_time(run.model, run.cost, run.riccati, spec.x0, run.M,
                                                          spec.t_max, spec.dt, spec.ilqr, spec.total_steps);
    r.solution = SolutionSummary::from(sol);
    const CompositeRollout comp = composite_rollout(run.model, run.cost, run.riccati, sol.transfer,
                                                    std::max(spec.total_steps, sol.T_star), spec.dt);
    const PhasedTrajectory tr = phased(comp.trajectory, sol.T_star);
    emit_trajectory_csv(tr, run.model.n(), run.model.p(), out_dir / "trajectory.csv");
    if (opts.emit_trajectories) r.composite = tr;
}

}  // namespace detail

/**
 * Runs one full experiment: horizon sweep with surrogate baseline, free-final-
 * time solve, and the composite rollout at the hitting time. Writes sweep.csv,
 * trajectory.csv and solution.json into out_dir (plus per-horizon trajectory
 * files when requested). Solver trouble inside the sweep is reported per
 * record; Riccati or level-selection failure throws NoConvergenceError.
 */
inline RunResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                                const RunOptions& opts = {}) {
    const PreparedRun run = prepare_run(spec);
    detail::ensure_dir(out_dir);
    RunResult r = detail::base_result("experiment", spec, run, opts);
    detail::run_sweep_stage(r, spec, run, out_dir, opts);
    detail::run_solve_stage(r, spec, run, out_dir, opts);
    emit_json(r, out_dir / "solution.json");
    return r;
}

inline RunResult run_sweep(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                           const RunOptions& opts = {}) {
    const PreparedRun run = prepare_run(spec);
    detail::ensure_dir(out_dir);
    RunResult r = detail::base_result("sweep", spec, run, opts);
    detail::run_sweep_stage(r, spec, run, out_dir, opts);
    emit_json(r, out_dir / "solution.json");
    return r;
}

inline RunResult run_solve(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                           const RunOptions& opts = {}) {
    const PreparedRun run = prepare_run(spec);
    detail::ensure_dir(out_dir);
    RunResult r = detail::base_result("solve", spec, run, opts);
    detail::run_solve_stage(r, spec, run, out_dir, opts);
    emit_json(r, out_dir / "solution.json");
    return r;
}

/// Pure LQR regulation from x0 for total_steps; no transfer phase.
inline RunResult run_regulate(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                              const RunOptions& opts = {}) {
    const PreparedRun run = prepare_run(spec);
    detail::ensure_dir(out_dir);
    RunResult r = detail::base_result("regulate", spec, run, opts);
    const LqrRollout roll = lqr_rollout(run.model, run.cost, run.riccati.K, spec.x0, spec.total_steps, spec.dt);
    r.regulation = RegulationSummary{roll.trajectory.running_cost(), roll.diverged,
                                     error_coords(run.model, roll.trajectory.states.back()).norm()};
    const PhasedTrajectory tr = detail::phased(roll.trajectory, 0);
    emit_trajectory_csv(tr, run.model.n(), run.model.p(), out_dir / "trajectory.csv");
    if (opts.emit_trajectories) r.composite = tr;
    emit_json(r, out_dir / "solution.json");
    return r;
}

}  // namespace ihreg
