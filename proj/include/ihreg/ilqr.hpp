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
#include "ihreg/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace ihreg {

struct IlqrOptions {
    int max_iterations = 500;
    double convergence_tol = 1e-7;  ///< stop when |dJ| < tol * (1 + |J|)
    double reg_init = 1e-6;
    double reg_min = 1e-8;
    double reg_max = 1e8;
    double reg_increase = 10.0;
    double reg_decrease = 2.0;
    std::vector<double> line_search_alphas = default_alphas();
    double fd_eps = 1e-5;

    static std::vector<double> default_alphas() {
        std::vector<double> a;
        for (int k = 0; k <= 10; ++k) a.push_back(std::ldexp(1.0, -k));
        return a;
    }

    void validate() const {
        if (max_iterations < 1) throw std::invalid_argument("IlqrOptions: max_iterations must be >= 1");
        if (!(convergence_tol > 0.0)) throw std::invalid_argument("IlqrOptions: convergence_tol must be positive");
        if (!(reg_min <= reg_init && reg_init <= reg_max)) {
            throw std::invalid_argument("IlqrOptions: need reg_min <= reg_init <= reg_max");
        }
        if (!(reg_increase > 1.0) || !(reg_decrease > 1.0)) {
            throw std::invalid_argument("IlqrOptions: regularization factors must exceed 1");
        }
        if (line_search_alphas.empty() || line_search_alphas.front() != 1.0) {
            throw std::invalid_argument("IlqrOptions: line search must start at alpha = 1");
        }
        for (std::size_t i = 1; i < line_search_alphas.size(); ++i) {
            if (!(line_search_alphas[i] < line_search_alphas[i - 1]) || !(line_search_alphas[i] > 0.0)) {
                throw std::invalid_argument("IlqrOptions: alphas must be strictly descending in (0, 1]");
            }
        }
    }
};

struct IlqrResult {
    Trajectory trajectory;
    bool converged = false;
    int iterations = 0;
    std::vector<double> cost_history;  ///< initial cost, then one entry per accepted step
    std::vector<double> reg_history;   ///< regularization used by each backward pass
    std::vector<Matrix> feedback_gains;
};

/// Open-loop rollout with cost bookkeeping. Throws NumericalError carrying the
/// index of the first step that blows up.
inline Trajectory evaluate_controls(const DynamicsModel& model, const QuadraticCost& cost, const TerminalCost& tc,
                                    const Vector& x0, const std::vector<Vector>& controls, double dt) {
    detail::require_size(x0, model.n(), "evaluate_controls x0");
    Trajectory traj;
    traj.states.reserve(controls.size() + 1);
    traj.step_costs.reserve(controls.size());
    traj.states.push_back(x0);
    for (std::size_t t = 0; t < controls.size(); ++t) {
        const Vector& u = controls[t];
        detail::require_size(u, model.p(), "evaluate_controls control");
        if (!u.allFinite()) throw NumericalError("non-finite control", static_cast<long>(t));
        const Vector& x = traj.states.back();
        const double c = cost(error_coords(model, x), u);
        Vector next;
        try {
            next = rk4_step(model, x, u, dt);
        } catch (const NumericalError&) {
            throw NumericalError("rollout blew up", static_cast<long>(t));
        }
        traj.step_costs.push_back(c);
        traj.states.push_back(std::move(next));
    }
    traj.controls = controls;
    traj.terminal_cost_value = tc(error_coords(model, traj.states.back()));
    traj.recompute_total();
    if (!std::isfinite(traj.total_cost)) {
        throw NumericalError("non-finite trajectory cost", static_cast<long>(controls.size()));
    }
    return traj;
}

namespace detail {

struct BackwardPass {
    std::vector<Vector> k;
    std::vector<Matrix> K;
    double expected_linear = 0.0;     // sum k'Q_u
    double expected_quadratic = 0.0;  // sum 0.5 k'Q_uu k

    double expected_decrease(double alpha) const {
        return -(alpha * expected_linear + alpha * alpha * expected_quadratic);
    }
};

inline std::optional<BackwardPass> backward_pass(const DynamicsModel& model, const QuadraticCost& cost,
                                                 const TerminalCost& tc, const Trajectory& traj,
                                                 const std::vector<LinearizedSystem>& jac, double reg) {
    const std::size_t T = traj.horizon();
    const Eigen::Index n = model.n();
    const Eigen::Index p = model.p();
    const Matrix Qx2 = 2.0 * cost.Q();
    const Matrix Ru2 = 2.0 * cost.R();

    const Vector eT = error_coords(model, traj.states.back());
    Vector Vx = Vector::Zero(n);
    Matrix Vxx = Matrix::Zero(n, n);
    if (tc.active_quadratic(eT)) {
        Vx = 2.0 * tc.P * eT;
        Vxx = 2.0 * tc.P;
    }

    BackwardPass bp;
    bp.k.assign(T, Vector::Zero(p));
    bp.K.assign(T, Matrix::Zero(p, n));
    for (std::size_t s = T; s-- > 0;) {
        const Matrix& A = jac[s].A;
        const Matrix& B = jac[s].B;
        const Vector e = error_coords(model, traj.states[s]);
        const Vector& u = traj.controls[s];

        const Vector Qx = Qx2 * e + A.transpose() * Vx;
        const Vector Qu = Ru2 * u + B.transpose() * Vx;
        const Matrix Qxx = Qx2 + A.transpose() * Vxx * A;
        const Matrix Quu = Ru2 + B.transpose() * Vxx * B;
        const Matrix Qux = B.transpose() * Vxx * A;

        const Matrix Quu_reg = Quu + reg * Matrix::Identity(p, p);
        Eigen::LLT<Matrix> llt(Quu_reg);
        if (llt.info() != Eigen::Success) return std::nullopt;
        const Vector k = -llt.solve(Qu);
        const Matrix K = -llt.solve(Qux);
        if (!k.allFinite() || !K.allFinite()) return std::nullopt;

        bp.expected_linear += k.dot(Qu);
        bp.expected_quadratic += 0.5 * k.dot(Quu * k);

        Vx = Qx + K.transpose() * Quu * k + K.transpose() * Qu + Qux.transpose() * k;
        Vxx = Qxx + K.transpose() * Quu * K + K.transpose() * Qux + Qux.transpose() * K;
        Vxx = 0.5 * (Vxx + Vxx.transpose()).eval();

        bp.k[s] = k;
        bp.K[s] = K;
    }
    return bp;
}

inline std::vector<LinearizedSystem> trajectory_jacobians(const DynamicsModel& model, const Trajectory& traj,
                                                          double dt, double eps) {
    std::vector<LinearizedSystem> jac;
    jac.reserve(traj.horizon());
    for (std::size_t t = 0; t < traj.horizon(); ++t) {
        jac.push_back(discrete_jacobians(model, traj.states[t], traj.controls[t], dt, eps, eps));
    }
    return jac;
}

inline Trajectory closed_loop_trial(const DynamicsModel& model, const QuadraticCost& cost, const TerminalCost& tc,
                                    const Trajectory& nominal, const BackwardPass& bp, double alpha, double dt) {
    const std::size_t T = nominal.horizon();
    Trajectory cand;
    cand.states.reserve(T + 1);
    cand.controls.reserve(T);
    cand.step_costs.reserve(T);
    cand.states.push_back(nominal.states.front());
    for (std::size_t t = 0; t < T; ++t) {
        const Vector& x = cand.states.back();
        Vector u = nominal.controls[t] + alpha * bp.k[t] + bp.K[t] * (x - nominal.states[t]);
        if (!u.allFinite()) throw NumericalError("non-finite control", static_cast<long>(t));
        cand.step_costs.push_back(cost(error_coords(model, x), u));
        Vector next = rk4_step(model, x, u, dt);
        cand.controls.push_back(std::move(u));
        cand.states.push_back(std::move(next));
    }
    cand.terminal_cost_value = tc(error_coords(model, cand.states.back()));
    cand.recompute_total();
    if (!std::isfinite(cand.total_cost)) throw NumericalError("non-finite trajectory cost");
    return cand;
}

}  // namespace detail

/**
 * @brief Iterative LQR for the fixed-horizon problem
 *        min sum_{t<T} c(x_t, u_t) + Phi(x_T),  x_{t+1} = rk4_step(x_t, u_t).
 *
 * Dynamics derivatives come from central differences of the RK4 map along the
 * current trajectory. For floored terminal costs the backward pass uses the
 * active branch; the line search always compares exact objective values.
 */
inline IlqrResult solve_fhocp(const DynamicsModel& model, const QuadraticCost& cost, const TerminalCost& tc,
                              const Vector& x0, int horizon, double dt,
                              const std::optional<std::vector<Vector>>& init_controls = std::nullopt,
                              const IlqrOptions& opts = {}) {
    opts.validate();
    if (horizon < 1) throw std::invalid_argument("solve_fhocp: horizon must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("solve_fhocp: dt must be positive");
    if (cost.n() != model.n() || cost.p() != model.p()) throw std::invalid_argument("solve_fhocp: cost dimensions");

    std::vector<Vector> controls;
    if (init_controls) {
        if (init_controls->size() != static_cast<std::size_t>(horizon)) {
            throw std::invalid_argument("solve_fhocp: init_controls length must equal the horizon");
        }
        controls = *init_controls;
    } else {
        controls.assign(horizon, Vector::Zero(model.p()));
    }

    IlqrResult res;
    Trajectory traj = evaluate_controls(model, cost, tc, x0, controls, dt);
    res.cost_history.push_back(traj.total_cost);
    double reg = opts.reg_init;
    std::vector<Matrix> last_gains;

    while (res.iterations < opts.max_iterations) {
        ++res.iterations;
        const auto jac = detail::trajectory_jacobians(model, traj, dt, opts.fd_eps);
        auto bp = detail::backward_pass(model, cost, tc, traj, jac, reg);
        res.reg_history.push_back(reg);
        if (!bp) {
            reg *= opts.reg_increase;
            if (reg > opts.reg_max) break;
            continue;
        }
        last_gains = bp->K;

        const double tol = opts.convergence_tol * (1.0 + std::abs(traj.total_cost));
        if (bp->expected_decrease(1.0) < tol) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        for (double alpha : opts.line_search_alphas) {
            Trajectory cand;
            try {
                cand = detail::closed_loop_trial(model, cost, tc, traj, *bp, alpha, dt);
            } catch (const NumericalError&) {
                continue;
            }
            if (cand.total_cost < traj.total_cost) {
                const double dJ = traj.total_cost - cand.total_cost;
                traj = std::move(cand);
                res.cost_history.push_back(traj.total_cost);
                accepted = true;
                reg = std::max(opts.reg_min, reg / opts.reg_decrease);
                if (dJ < opts.convergence_tol * (1.0 + std::abs(traj.total_cost))) res.converged = true;
                break;
            }
        }
        if (res.converged) break;
        if (!accepted) {
            reg *= opts.reg_increase;
            if (reg > opts.reg_max) break;
        }
    }

    res.trajectory = std::move(traj);
    res.feedback_gains = std::move(last_gains);
    return res;
}

}  // namespace ihreg
