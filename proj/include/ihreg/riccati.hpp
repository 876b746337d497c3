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

#include <functional>

namespace ihreg {

struct RiccatiSolution {
    Matrix P;  ///< stationary cost-to-go x'Px of the linearized problem
    Matrix K;  ///< gain for u = -K x
    long iterations = 0;
    double residual = 0.0;
    double closed_loop_radius = 0.0;
};

inline double spectral_radius(const Matrix& A) {
    return Eigen::EigenSolver<Matrix>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Max-abs-entry residual of the discrete algebraic Riccati equation.
inline double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P) {
    const Matrix BtPA = B.transpose() * P * A;
    const Matrix S = R + B.transpose() * P * B;
    const Matrix rhs = A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
    return (P - rhs).cwiseAbs().maxCoeff();
}

/**
 * Solves P = A'PA - A'PB (R + B'PB)^{-1} B'PA + Q by value iteration from P = Q.
 *
 * Stops when the max-abs change between iterates is <= tol. Throws
 * NoConvergenceError when max_iter is exhausted, the iterates overflow, or the
 * resulting closed loop is not Schur stable; NumericalError when R + B'PB is not positive definite.
 * The observer, if set, sees every iterate (including P0 = Q).
 */
inline RiccatiSolution solve_dare(const LinearizedSystem& lin, const QuadraticCost& cost, double tol = 1e-10,
                                  long max_iter = 100000,
                                  const std::function<void(const Matrix&)>& observer = nullptr) {
    const Matrix& A = lin.A;
    const Matrix& B = lin.B;
    const Eigen::Index n = A.rows();
    detail::require_shape(A, n, n, "solve_dare A");
    detail::require_shape(B, n, cost.p(), "solve_dare B");
    detail::require_shape(cost.Q(), n, n, "solve_dare Q");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_dare: tol must be positive");

    Matrix P = cost.Q();
    if (observer) observer(P);
    long it = 0;
    bool converged = false;
    while (it < max_iter) {
        ++it;
        const Matrix BtPA = B.transpose() * P * A;
        Eigen::LLT<Matrix> S(cost.R() + B.transpose() * P * B);
        if (S.info() != Eigen::Success) throw NumericalError("solve_dare: R + B'PB is not positive definite");
        Matrix next = A.transpose() * P * A - BtPA.transpose() * S.solve(BtPA) + cost.Q();
        next = 0.5 * (next + next.transpose()).eval();
        if (!next.allFinite()) {
            throw NoConvergenceError("solve_dare: iterates diverged after " + std::to_string(it) +
                                     " iterations (linearization not stabilizable?)");
        }
        const double change = (next - P).cwiseAbs().maxCoeff();
        P = std::move(next);
        if (observer) observer(P);
        if (change <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NoConvergenceError("solve_dare: no convergence after " + std::to_string(max_iter) +
                                 " iterations (linearization not stabilizable?)");
    }

    RiccatiSolution sol;
    const Matrix S = cost.R() + B.transpose() * P * B;
    sol.K = S.llt().solve(B.transpose() * P * A);
    sol.P = std::move(P);
    sol.iterations = it;
    sol.residual = dare_residual(A, B, cost.Q(), cost.R(), sol.P);
    sol.closed_loop_radius = spectral_radius(A - B * sol.K);
    if (!(sol.closed_loop_radius < 1.0)) {
        throw NoConvergenceError("solve_dare: closed loop is not stable (radius " +
                                 std::to_string(sol.closed_loop_radius) + ")");
    }
    return sol;
}

struct LqrRollout {
    Trajectory trajectory;
    bool diverged = false;
};

/**
 * Closed-loop rollout of the nonlinear plant under u = -K error_coords(x).
 * Divergence (non-finite state or error norm above divergence_bound) stops the
 * rollout and is reported through the flag; the partial trajectory is kept.
 */
inline LqrRollout lqr_rollout(const DynamicsModel& model, const QuadraticCost& cost, const Matrix& K,
                              const Vector& x0, long steps, double dt, double divergence_bound = 1e6) {
    detail::require_size(x0, model.n(), "lqr_rollout x0");
    detail::require_shape(K, model.p(), model.n(), "lqr_rollout K");
    if (steps < 0) throw std::invalid_argument("lqr_rollout: steps must be >= 0");

    LqrRollout out;
    Trajectory& traj = out.trajectory;
    traj.states.push_back(x0);
    for (long t = 0; t < steps; ++t) {
        const Vector e = error_coords(model, traj.states.back());
        const Vector u = -K * e;
        Vector next;
        try {
            next = rk4_step(model, traj.states.back(), u, dt);
        } catch (const NumericalError&) {
            out.diverged = true;
            break;
        }
        traj.controls.push_back(u);
        traj.step_costs.push_back(cost(e, u));
        traj.states.push_back(std::move(next));
        if (error_coords(model, traj.states.back()).norm() > divergence_bound) {
            out.diverged = true;
            break;
        }
    }
    traj.recompute_total();
    return out;
}

}  // namespace ihreg
