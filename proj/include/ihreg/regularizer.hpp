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
#include "ihreg/riccati.hpp"
#include "ihreg/trajectory.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ihreg {

/// Sub-level set {x : x'Px <= M} of the linearized cost-to-go. The boundary
/// counts as inside.
struct TerminalSet {
    Matrix P;
    double M = 0.0;

    double value(const Vector& e) const { return detail::quad_form(P, e); }
    bool contains(const Vector& e) const { return value(e) <= M; }
};

/// Outcome of one fixed-horizon solve inside the free-final-time search.
struct HorizonProbe {
    int T = 0;
    double fh_cost = 0.0;         ///< running cost + x_T'Px_T
    double terminal_value = 0.0;  ///< x_T'Px_T
    bool converged = false;
    int iterations = 0;
    std::string init;  ///< initialization that produced the kept optimum

    bool operator==(const HorizonProbe&) const = default;
};

struct RegularizedSolution {
    int T_star = 0;
    bool hit = false;
    Trajectory transfer;  ///< T_star steps of open-loop controls
    double M = 0.0;
    double J_M = 0.0;
    double transfer_cost = 0.0;
    double expected_regulation_cost = 0.0;
    double actual_regulation_cost = 0.0;
    double total_composite_cost = 0.0;
    bool regulation_diverged = false;
    long regulation_time = 0;  ///< steps until the regulation tail holds < 1% of its cost
    std::vector<HorizonProbe> probes;
};

struct CompositeRollout {
    Trajectory trajectory;  ///< full horizon; no terminal cost
    int transfer_steps = 0;
    double transfer_cost = 0.0;
    double actual_regulation_cost = 0.0;
    bool diverged = false;
};

struct SweepRecord {
    int T = 0;
    double fh_cost = 0.0;
    double transfer_cost = 0.0;
    double expected_regulation_cost = 0.0;
    double actual_regulation_cost = 0.0;
    double total_composite_cost = 0.0;
    double terminal_error = 0.0;
    bool hit_omega = false;
    int solver_iterations = 0;
    bool converged = false;
    bool failed = false;
    std::string error;
    std::string init;                  ///< "warm" or "zero"
    std::vector<double> cost_history;  ///< solver diagnostics
    std::vector<double> reg_history;

    bool operator==(const SweepRecord&) const = default;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<Trajectory> composites;  ///< one per record; empty trajectory for failed records
    double surrogate_cost = 0.0;
    bool surrogate_converged = false;
    std::string surrogate_init;  ///< "zero" or "composite_T<k>"
    Trajectory surrogate;
};

/// First index k such that sum_{j >= k} costs[j] < fraction * sum(costs).
inline long regulation_time(const std::vector<double>& costs, double fraction = 0.01) {
    double total = 0.0;
    for (double c : costs) total += c;
    if (total <= 0.0) return 0;
    double tail = total;
    for (std::size_t k = 0; k < costs.size(); ++k) {
        if (tail < fraction * total) return static_cast<long>(k);
        tail -= costs[k];
    }
    return static_cast<long>(costs.size());
}

/**
 * Runs the transfer controls open loop, then u = -K x_tilde until total_steps.
 * A regulator blowup leaves a truncated trajectory and sets diverged.
 */
inline CompositeRollout composite_rollout(const DynamicsModel& model, const QuadraticCost& cost,
                                          const RiccatiSolution& ric, const Trajectory& transfer, int total_steps,
                                          double dt) {
    const int T = static_cast<int>(transfer.horizon());
    if (total_steps < T) throw std::invalid_argument("composite_rollout: total_steps shorter than transfer");
    if (transfer.states.empty()) throw std::invalid_argument("composite_rollout: transfer has no initial state");

    CompositeRollout out;
    out.transfer_steps = T;
    Trajectory& full = out.trajectory;
    full.states.assign(transfer.states.begin(), transfer.states.end());
    full.controls.assign(transfer.controls.begin(), transfer.controls.end());
    full.step_costs.assign(transfer.step_costs.begin(), transfer.step_costs.end());
    out.transfer_cost = transfer.running_cost();

    const LqrRollout reg = lqr_rollout(model, cost, ric.K, full.states.back(), total_steps - T, dt);
    out.diverged = reg.diverged;
    out.actual_regulation_cost = reg.trajectory.running_cost();
    full.states.insert(full.states.end(), reg.trajectory.states.begin() + 1, reg.trajectory.states.end());
    full.controls.insert(full.controls.end(), reg.trajectory.controls.begin(), reg.trajectory.controls.end());
    full.step_costs.insert(full.step_costs.end(), reg.trajectory.step_costs.begin(),
                           reg.trajectory.step_costs.end());
    full.terminal_cost_value = 0.0;
    full.recompute_total();
    return out;
}

namespace detail {

/// Extends a control sequence by closed-loop LQR steps from its terminal state.
inline std::vector<Vector> extend_with_lqr(const DynamicsModel& model, const QuadraticCost& cost,
                                           const RiccatiSolution& ric, std::vector<Vector> controls,
                                           const Vector& terminal_state, int extra, double dt) {
    const LqrRollout tail = lqr_rollout(model, cost, ric.K, terminal_state, extra, dt);
    const std::size_t want = controls.size() + static_cast<std::size_t>(extra);
    controls.insert(controls.end(), tail.trajectory.controls.begin(), tail.trajectory.controls.end());
    controls.resize(want, Vector::Zero(model.p()));  // pads a diverged tail
    return controls;
}

struct HorizonSolve {
    IlqrResult result;
    std::string init;  ///< "warm" or "zero"
};

/// Solves one horizon from the warm start (if any) and from zero controls and
/// keeps the lower-cost optimum; ties go to the warm start.
inline HorizonSolve solve_horizon(const DynamicsModel& model, const QuadraticCost& cost, const TerminalCost& tc,
                                  const Vector& x0, int T, double dt,
                                  const std::optional<std::vector<Vector>>& warm, const IlqrOptions& opts) {
    if (!warm) return {solve_fhocp(model, cost, tc, x0, T, dt, std::nullopt, opts), "zero"};
    std::optional<IlqrResult> a;
    std::optional<IlqrResult> b;
    std::exception_ptr warm_error;
    try {
        a = solve_fhocp(model, cost, tc, x0, T, dt, warm, opts);
    } catch (const NumericalError&) {
        warm_error = std::current_exception();
    }
    try {
        b = solve_fhocp(model, cost, tc, x0, T, dt, std::nullopt, opts);
    } catch (const NumericalError&) {
        if (!a) std::rethrow_exception(warm_error);
    }
    if (a && (!b || a->trajectory.total_cost <= b->trajectory.total_cost)) return {std::move(*a), "warm"};
    return {std::move(*b), "zero"};
}

}  // namespace detail

/**
 * @brief Free-final-time transfer into the terminal set {x'Px <= M}.
 *
 * Solves the Riccati-terminal fixed-horizon problem for T = 1, 2, ..., T_max
 * and stops at the first horizon whose optimized terminal state lies in the
 * set. Each horizon is solved from the previous solution extended by one LQR
 * step and from zero controls; the cheaper optimum is kept and seeds the next
 * horizon. The returned J_M uses the floored terminal value max(x_T'Px_T, M).
 * A start already inside the set gives T_star = 0 and J_M = x0'Px0.
 * total_steps bounds the simulated regulation tail used for the actual
 * regulation cost.
 */
inline RegularizedSolution solve_free_final_time(const DynamicsModel& model, const QuadraticCost& cost,
                                                 const RiccatiSolution& ric, const Vector& x0, double M, int T_max,
                                                 double dt, const IlqrOptions& opts = {}, int total_steps = 150) {
    if (!(M > 0.0)) throw std::invalid_argument("solve_free_final_time: M must be positive");
    if (T_max < 1) throw std::invalid_argument("solve_free_final_time: T_max must be >= 1");
    detail::require_size(x0, model.n(), "solve_free_final_time x0");

    const TerminalSet omega{ric.P, M};
    const TerminalCost terminal = TerminalCost::riccati(ric.P);
    RegularizedSolution sol;
    sol.M = M;

    auto finish = [&](Trajectory transfer) {
        const Vector eT = error_coords(model, transfer.states.back());
        sol.T_star = static_cast<int>(transfer.horizon());
        sol.transfer_cost = transfer.running_cost();
        sol.expected_regulation_cost = omega.value(eT);
        sol.J_M = sol.T_star == 0 ? sol.expected_regulation_cost
                                  : sol.transfer_cost + std::max(sol.expected_regulation_cost, M);
        const int tail_steps = std::max(0, total_steps - sol.T_star);
        const LqrRollout reg = lqr_rollout(model, cost, ric.K, transfer.states.back(), tail_steps, dt);
        sol.regulation_diverged = reg.diverged;
        sol.actual_regulation_cost = reg.trajectory.running_cost();
        sol.regulation_time = regulation_time(reg.trajectory.step_costs);
        sol.total_composite_cost = sol.transfer_cost + sol.actual_regulation_cost;
        transfer.terminal_cost_value = sol.expected_regulation_cost;
        transfer.recompute_total();
        sol.transfer = std::move(transfer);
    };

    if (omega.contains(error_coords(model, x0))) {
        sol.hit = true;
        Trajectory empty;
        empty.states.push_back(x0);
        finish(std::move(empty));
        return sol;
    }

    std::vector<Vector> warm;
    Vector warm_terminal = x0;
    Trajectory last;
    for (int T = 1; T <= T_max; ++T) {
        auto init = detail::extend_with_lqr(model, cost, ric, std::move(warm), warm_terminal, 1, dt);
        detail::HorizonSolve hs = detail::solve_horizon(model, cost, terminal, x0, T, dt, std::move(init), opts);
        IlqrResult& r = hs.result;
        const Vector eT = error_coords(model, r.trajectory.states.back());
        HorizonProbe probe{T, r.trajectory.total_cost, omega.value(eT), r.converged, r.iterations, hs.init};
        sol.probes.push_back(probe);
        warm = r.trajectory.controls;
        warm_terminal = r.trajectory.states.back();
        last = std::move(r.trajectory);
        if (omega.contains(eT)) {
            sol.hit = true;
            break;
        }
    }
    finish(std::move(last));
    return sol;
}

/**
 * Fixed-horizon solves with the Riccati terminal cost over T_list, each
 * followed by LQR regulation up to total_steps, plus the no-terminal-cost
 * solve at T = total_steps used as the infinite-horizon surrogate.
 *
 * With warm_start the horizons are solved in order, each from the previous
 * kept solution extended by LQR steps and from zero controls, keeping the
 * cheaper optimum; without it every horizon starts from zero controls only and
 * the horizons are solved concurrently.
 */
inline SweepResult horizon_sweep(const DynamicsModel& model, const QuadraticCost& cost, const RiccatiSolution& ric,
                                 const Vector& x0, const std::vector<int>& T_list, int total_steps, double dt,
                                 double M, const IlqrOptions& opts = {}, bool warm_start = true) {
    if (T_list.empty()) throw std::invalid_argument("horizon_sweep: empty T_list");
    for (std::size_t i = 0; i < T_list.size(); ++i) {
        if (T_list[i] < 1 || T_list[i] > total_steps || (i > 0 && T_list[i] <= T_list[i - 1])) {
            throw std::invalid_argument("horizon_sweep: T_list must be ascending within [1, total_steps]");
        }
    }
    const TerminalSet omega{ric.P, M};
    const TerminalCost terminal = TerminalCost::riccati(ric.P);

    struct Outcome {
        SweepRecord record;
        Trajectory composite;
        std::vector<Vector> controls;
        Vector terminal_state;
    };

    auto run_one = [&](int T, std::optional<std::vector<Vector>> init) {
        Outcome out;
        out.record.T = T;
        try {
            const detail::HorizonSolve hs = detail::solve_horizon(model, cost, terminal, x0, T, dt, init, opts);
            const IlqrResult& r = hs.result;
            const Trajectory& tr = r.trajectory;
            const Vector eT = error_coords(model, tr.states.back());
            CompositeRollout comp = composite_rollout(model, cost, ric, tr, total_steps, dt);
            SweepRecord& rec = out.record;
            rec.fh_cost = tr.total_cost;
            rec.transfer_cost = comp.transfer_cost;
            rec.expected_regulation_cost = omega.value(eT);
            rec.actual_regulation_cost = comp.actual_regulation_cost;
            rec.total_composite_cost = rec.transfer_cost + rec.actual_regulation_cost;
            rec.terminal_error = eT.norm();
            rec.hit_omega = omega.contains(eT);
            rec.solver_iterations = r.iterations;
            rec.converged = r.converged;
            rec.init = hs.init;
            rec.cost_history = r.cost_history;
            rec.reg_history = r.reg_history;
            if (comp.diverged) {
                rec.failed = true;
                rec.error = "regulator diverged";
            }
            out.composite = std::move(comp.trajectory);
            out.controls = tr.controls;
            out.terminal_state = tr.states.back();
        } catch (const std::exception& ex) {
            out.record.failed = true;
            out.record.error = ex.what();
        }
        return out;
    };

    SweepResult result;
    if (warm_start) {
        std::vector<Vector> warm;
        Vector warm_terminal = x0;
        int prev_T = 0;
        for (int T : T_list) {
            auto init = detail::extend_with_lqr(model, cost, ric, warm, warm_terminal, T - prev_T, dt);
            Outcome out = run_one(T, std::move(init));
            if (!out.record.failed || !out.controls.empty()) {
                warm = std::move(out.controls);
                warm_terminal = out.terminal_state;
                prev_T = T;
            }
            result.records.push_back(std::move(out.record));
            result.composites.push_back(std::move(out.composite));
        }
    } else {
        std::vector<std::future<Outcome>> jobs;
        for (int T : T_list) jobs.push_back(std::async(std::launch::async, run_one, T, std::nullopt));
        for (auto& job : jobs) {
            Outcome out = job.get();
            result.records.push_back(std::move(out.record));
            result.composites.push_back(std::move(out.composite));
        }
    }

    // The long no-terminal-cost problem has poor local minima from rest (e.g.
    // pumping swings), so the composite of the longest successful horizon is
    // tried as a second initialization and the cheaper optimum is kept.
    IlqrResult surrogate = solve_fhocp(model, cost, TerminalCost::none(), x0, total_steps, dt, std::nullopt, opts);
    result.surrogate_init = "zero";
    for (std::size_t i = result.records.size(); i-- > 0;) {
        const Trajectory& comp = result.composites[i];
        if (result.records[i].failed || comp.horizon() != static_cast<std::size_t>(total_steps)) continue;
        IlqrResult seeded =
            solve_fhocp(model, cost, TerminalCost::none(), x0, total_steps, dt, comp.controls, opts);
        if (seeded.trajectory.total_cost < surrogate.trajectory.total_cost) {
            surrogate = std::move(seeded);
            result.surrogate_init = "composite_T" + std::to_string(result.records[i].T);
        }
        break;
    }
    result.surrogate_cost = surrogate.trajectory.total_cost;
    result.surrogate_converged = surrogate.converged;
    result.surrogate = std::move(surrogate.trajectory);
    return result;
}

struct ClfSample {
    int t = 0;
    bool inside = false;
    double value = 0.0;
};

struct ClfReport {
    std::vector<ClfSample> samples;
    bool complete = true;
    bool decreasing = true;
    double max_increase = 0.0;  ///< largest v[i+1] - v[i] observed
};

/**
 * Evaluates the regularized value along the composite closed loop from x0:
 * J_M (re-solved) at every stride-th state outside the terminal set, x'Px
 * inside it. decreasing holds when every consecutive difference is below tol.
 */
inline ClfReport clf_decrease_check(const DynamicsModel& model, const QuadraticCost& cost, const RiccatiSolution& ric,
                                    const Vector& x0, double M, int T_max, int stride, double dt,
                                    const IlqrOptions& opts = {}, int total_steps = 150, double tol = 1e-6) {
    if (stride < 1) throw std::invalid_argument("clf_decrease_check: stride must be >= 1");
    const TerminalSet omega{ric.P, M};
    ClfReport report;

    const RegularizedSolution root = solve_free_final_time(model, cost, ric, x0, M, T_max, dt, opts, total_steps);
    if (!root.hit) report.complete = false;
    const CompositeRollout loop =
        composite_rollout(model, cost, ric, root.transfer, std::max(total_steps, root.T_star), dt);
    if (loop.diverged) report.complete = false;

    const auto& states = loop.trajectory.states;
    for (std::size_t t = 0; t < states.size(); t += static_cast<std::size_t>(stride)) {
        const Vector e = error_coords(model, states[t]);
        ClfSample s{static_cast<int>(t), omega.contains(e), 0.0};
        if (s.inside) {
            s.value = omega.value(e);
        } else if (t == 0) {
            s.value = root.J_M;
        } else {
            try {
                const RegularizedSolution r =
                    solve_free_final_time(model, cost, ric, states[t], M, T_max, dt, opts, total_steps);
                if (!r.hit) report.complete = false;
                s.value = r.J_M;
            } catch (const std::exception&) {
                report.complete = false;
                s.value = std::numeric_limits<double>::quiet_NaN();
            }
        }
        report.samples.push_back(s);
    }
    for (std::size_t i = 1; i < report.samples.size(); ++i) {
        const double inc = report.samples[i].value - report.samples[i - 1].value;
        if (!(inc < tol)) report.decreasing = false;
        report.max_increase = i == 1 ? inc : std::max(report.max_increase, inc);
    }
    return report;
}

/**
 * Picks the largest level from candidates (tried in the given order) for which
 * every one of `samples` states drawn uniformly in direction on the boundary
 * x'Px = M is driven by the LQR law to ||x_tilde|| < tol within steps.
 * Deterministic for a fixed seed. Throws NoConvergenceError if none qualifies.
 */
inline double select_level(const DynamicsModel& model, const QuadraticCost& cost, const RiccatiSolution& ric,
                           double dt, const std::vector<double>& candidates, int samples = 50, int steps = 150,
                           double tol = 1e-3, std::uint64_t seed = 20260101) {
    const Eigen::Index n = model.n();
    Eigen::LLT<Matrix> llt(ric.P);
    if (llt.info() != Eigen::Success) throw NumericalError("select_level: P is not positive definite");
    const Matrix L = llt.matrixL();

    for (double M : candidates) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        bool ok = true;
        for (int s = 0; s < samples && ok; ++s) {
            Vector z(n);
            for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
            z.normalize();
            // x'Px = M  <=>  x = sqrt(M) L^{-T} z with |z| = 1
            const Vector e = std::sqrt(M) * L.transpose().triangularView<Eigen::Upper>().solve(z);
            const LqrRollout r = lqr_rollout(model, cost, ric.K, from_error_coords(model, e), steps, dt);
            ok = !r.diverged && error_coords(model, r.trajectory.states.back()).norm() < tol;
        }
        if (ok) return M;
    }
    throw NoConvergenceError("select_level: no candidate level is inside the regulator's region of attraction");
}

/// 10, 5, 2, 1, 0.5, 0.2, 0.1, ... down to 1e-4.
inline std::vector<double> default_level_candidates() {
    std::vector<double> out;
    double decade = 10.0;
    while (decade > 1e-4 * 0.5) {
        out.push_back(decade);
        if (decade / 2.0 > 1e-4) out.push_back(decade / 2.0);
        if (decade / 5.0 > 1e-4) out.push_back(decade / 5.0);
        decade /= 10.0;
    }
    return out;
}

}  // namespace ihreg
