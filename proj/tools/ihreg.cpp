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

#include "ihreg/ihreg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum ExitCode : int { kOk = 0, kInvalidConfig = 2, kNoConvergence = 3, kIoFailure = 4 };

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(ihreg::parse_double(item));
        } catch (const std::exception&) {
            throw ihreg::ConfigError("--x0: cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw ihreg::ConfigError("--x0 is empty");
    return out;
}

struct Flags {
    std::optional<std::string> model;
    std::optional<std::string> x0;
    std::optional<double> M;
    std::optional<double> dt;
    std::optional<int> steps;
    std::optional<int> t_max;
    std::string out = "out";
    std::optional<std::string> config;
    bool emit_trajectories = false;
    bool no_warm_start = false;
    bool diagnostics = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--model", f.model, "Dynamics model (pendulum, cartpole, double_integrator)");
    cmd->add_option("--x0", f.x0, "Initial state, comma separated");
    cmd->add_option("--M", f.M, "Terminal level; omitted selects it automatically");
    cmd->add_option("--dt", f.dt, "Time step [s]");
    cmd->add_option("--steps", f.steps, "Total simulated steps");
    cmd->add_option("--t-max", f.t_max, "Largest transfer horizon searched");
    cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_flag("--emit-trajectories", f.emit_trajectories, "Write per-horizon trajectory files");
    cmd->add_flag("--no-warm-start", f.no_warm_start, "Solve every horizon from zero controls");
    cmd->add_flag("--diagnostics", f.diagnostics, "Include solver histories in solution.json");
}

ihreg::ExperimentSpec build_spec(const Flags& f, std::optional<int> experiment) {
    ihreg::SpecOverrides o;
    o.experiment = experiment;
    o.model = f.model;
    if (f.x0) o.x0 = parse_vector(*f.x0);
    o.M = f.M;
    o.dt = f.dt;
    o.steps = f.steps;
    o.t_max = f.t_max;
    o.no_warm_start = f.no_warm_start;
    std::optional<nlohmann::json> config;
    if (f.config) {
        const std::string text = ihreg::read_file(*f.config);
        try {
            config = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& ex) {
            throw ihreg::ConfigError(*f.config + ": " + ex.what());
        }
    }
    return ihreg::resolve_spec(o, config);
}

void report(const ihreg::RunResult& r, const std::filesystem::path& out) {
    std::cout << "model " << r.spec.model << ", M = " << ihreg::format_double(r.M)
              << (r.M_selected ? " (selected)" : "") << "\n";
    if (!r.sweep.empty()) {
        int failed = 0;
        for (const auto& rec : r.sweep) failed += rec.failed ? 1 : 0;
        std::cout << "sweep: " << r.sweep.size() << " horizons, " << failed << " failed\n";
    }
    if (r.surrogate) std::cout << "surrogate cost " << ihreg::format_double(r.surrogate->cost) << "\n";
    if (r.solution) {
        std::cout << "T* = " << r.solution->T_star << (r.solution->hit ? "" : " (level set not reached)")
                  << ", J_M = " << ihreg::format_double(r.solution->J_M)
                  << ", composite cost " << ihreg::format_double(r.solution->total_composite_cost) << "\n";
    }
    if (r.regulation) {
        std::cout << "regulation cost " << ihreg::format_double(r.regulation->cost)
                  << (r.regulation->diverged ? " (diverged)" : "") << "\n";
    }
    std::cout << "wrote " << out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Infinite-horizon optimal control by free-final-time regularization"};
    app.set_version_flag("--version", std::string(ihreg::kToolName) + " " + ihreg::kToolVersion);
    app.require_subcommand(1);

    Flags flags;
    int experiment_id = 0;
    auto* exp = app.add_subcommand("experiment", "Run a bundled experiment (sweep, solve, composite)");
    exp->add_option("id", experiment_id, "Experiment id 1-4")->required()->check(CLI::Range(1, 4));
    auto* sweep = app.add_subcommand("sweep", "Finite-horizon sweep over T with the surrogate baseline");
    auto* solve = app.add_subcommand("solve", "Free-final-time transfer into the terminal level set");
    auto* regulate = app.add_subcommand("regulate", "LQR regulation from x0");
    for (auto* cmd : {exp, sweep, solve, regulate}) add_flags(cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalidConfig;
    }

    try {
        const ihreg::ExperimentSpec spec =
            build_spec(flags, exp->parsed() ? std::optional<int>(experiment_id) : std::nullopt);
        const ihreg::RunOptions opts{flags.emit_trajectories, flags.diagnostics};
        const std::filesystem::path out = flags.out;
        ihreg::RunResult r;
        if (exp->parsed()) {
            r = ihreg::run_experiment(spec, out, opts);
        } else if (sweep->parsed()) {
            r = ihreg::run_sweep(spec, out, opts);
        } else if (solve->parsed()) {
            r = ihreg::run_solve(spec, out, opts);
        } else {
            r = ihreg::run_regulate(spec, out, opts);
        }
        report(r, out);
    } catch (const ihreg::ConfigError& e) {
        std::cerr << "ihreg: invalid config: " << e.what() << "\n";
        return kInvalidConfig;
    } catch (const ihreg::IoError& e) {
        std::cerr << "ihreg: I/O error: " << e.what() << "\n";
        return kIoFailure;
    } catch (const ihreg::NoConvergenceError& e) {
        std::cerr << "ihreg: no convergence: " << e.what() << "\n";
        return kNoConvergence;
    } catch (const ihreg::NumericalError& e) {
        std::cerr << "ihreg: numerical failure: " << e.what() << "\n";
        return kNoConvergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "ihreg: invalid config: " << e.what() << "\n";
        return kInvalidConfig;
    }
    return kOk;
}
