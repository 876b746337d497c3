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
#include "ihreg/riccati.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace ihreg {
namespace {

using testing::vec;

LinearizedSystem scalar(double a, double b) {
    return {Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), 0.1};
}

QuadraticCost scalar_cost(double q, double r) { return {Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, r)}; }

struct Bundled {
    DynamicsModel model;
    QuadraticCost cost;
    LinearizedSystem lin;
};

Bundled bundled(const std::string& id) {
    const ExperimentSpec s = apply_config(ExperimentSpec{}, nlohmann::json{{"model", id}});
    DynamicsModel m = s.make_model();
    LinearizedSystem lin = linearize_discrete(m, s.dt);
    return {std::move(m), s.cost(), std::move(lin)};
}

TEST(SolveDare, ScalarGoldenRatio) {
    const RiccatiSolution sol = solve_dare(scalar(1, 1), scalar_cost(1, 1));
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    EXPECT_NEAR(sol.P(0, 0), phi, 1e-10);
    EXPECT_NEAR(sol.K(0, 0), phi / (1.0 + phi), 1e-10);
    EXPECT_LT(sol.closed_loop_radius, 1.0);
}

TEST(SolveDare, DeadbeatStateGivesQ) {
    for (double b : {0.3, 1.0, 4.0}) {
        for (double r : {0.01, 1.0}) {
            const RiccatiSolution sol = solve_dare(scalar(0, b), scalar_cost(1, r));
            EXPECT_NEAR(sol.P(0, 0), 1.0, 1e-14);
            EXPECT_NEAR(sol.K(0, 0), 0.0, 1e-14);
        }
    }
}

TEST(SolveDare, BundledModelsSatisfyInvariants) {
    for (const char* id : {"pendulum", "cartpole"}) {
        const Bundled b = bundled(id);
        const RiccatiSolution sol = solve_dare(b.lin, b.cost);
        EXPECT_LE(sol.residual, 1e-8) << id;
        EXPECT_LE(dare_residual(b.lin.A, b.lin.B, b.cost.Q(), b.cost.R(), sol.P), 1e-8) << id;
        EXPECT_LE((sol.P - sol.P.transpose()).cwiseAbs().maxCoeff(), 1e-12) << id;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sol.P);
        EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << id;
        EXPECT_GT(spectral_radius(b.lin.A), 1.0) << id;
        EXPECT_LT(sol.closed_loop_radius, 1.0) << id;
        EXPECT_NEAR(sol.closed_loop_radius, spectral_radius(b.lin.A - b.lin.B * sol.K), 1e-12) << id;
    }
}

TEST(SolveDare, IteratesAreMonotoneFromQ) {
    for (const char* id : {"pendulum", "cartpole"}) {
        const Bundled b = bundled(id);
        Matrix prev;
        bool first = true;
        double worst = 0.0;
        solve_dare(b.lin, b.cost, 1e-10, 100000, [&](const Matrix& P) {
            if (!first) {
                Eigen::SelfAdjointEigenSolver<Matrix> eig(P - prev);
                worst = std::min(worst, eig.eigenvalues().minCoeff());
            }
            first = false;
            prev = P;
        });
        EXPECT_GE(worst, -1e-12) << id;
    }
}

TEST(SolveDare, LinearInfiniteHorizonCostMatchesValue) {
    const DynamicsModel m = make_double_integrator();
    const QuadraticCost c = QuadraticCost::diagonal(vec({1.0, 0.5}), vec({0.2}));
    const RiccatiSolution sol = solve_dare(linearize_discrete(m, 0.1), c);
    const Vector x0 = vec({1.0, -0.5});
    const LqrRollout r = lqr_rollout(m, c, sol.K, x0, 2000, 0.1);
    ASSERT_FALSE(r.diverged);
    EXPECT_LT(r.trajectory.states.back().norm(), 1e-12);
    const double value = x0.dot(sol.P * x0);
    EXPECT_NEAR(r.trajectory.running_cost(), value, 1e-3 * value);
}

TEST(SolveDare, UnstabilizableThrows) {
    Matrix A(2, 2), B(2, 1);
    A << 1.2, 0.0, 0.0, 0.5;
    B << 0.0, 1.0;
    const LinearizedSystem lin{A, B, 0.1};
    const QuadraticCost c(Matrix::Identity(2, 2), Matrix::Identity(1, 1));
    EXPECT_THROW(solve_dare(lin, c, 1e-10, 5000), NoConvergenceError);
    EXPECT_THROW(solve_dare(lin, c, 1e-10, 50), NoConvergenceError);
}

TEST(SolveDare, ShapeMismatchThrows) {
    const LinearizedSystem lin{Matrix::Identity(2, 2), Matrix::Ones(2, 1), 0.1};
    EXPECT_THROW(solve_dare(lin, scalar_cost(1, 1)), std::invalid_argument);
}

TEST(LqrRollout, StartAtGoalStaysThere) {
    const Bundled b = bundled("pendulum");
    const RiccatiSolution sol = solve_dare(b.lin, b.cost);
    const LqrRollout r = lqr_rollout(b.model, b.cost, sol.K, b.model.goal(), 150, 0.1);
    EXPECT_FALSE(r.diverged);
    EXPECT_EQ(r.trajectory.states.size(), 151u);
    EXPECT_LE(r.trajectory.total_cost, 1e-20);
    for (const auto& x : r.trajectory.states) EXPECT_LE((x - b.model.goal()).norm(), 1e-12);
}

TEST(LqrRollout, SmallOffsetConverges) {
    for (const char* id : {"pendulum", "cartpole"}) {
        const Bundled b = bundled(id);
        const RiccatiSolution sol = solve_dare(b.lin, b.cost);
        Vector e = Vector::Ones(b.model.n());
        e *= 0.05 / e.norm();
        const LqrRollout r = lqr_rollout(b.model, b.cost, sol.K, from_error_coords(b.model, e), 150, 0.1);
        EXPECT_FALSE(r.diverged) << id;
        EXPECT_LT(error_coords(b.model, r.trajectory.states.back()).norm(), 1e-4) << id;
    }
}

TEST(LqrRollout, HangingCartPoleDiverges) {
    const Bundled b = bundled("cartpole");
    const RiccatiSolution sol = solve_dare(b.lin, b.cost);
    const LqrRollout r = lqr_rollout(b.model, b.cost, sol.K, Vector::Zero(4), 150, 0.1);
    EXPECT_TRUE(r.diverged);
    EXPECT_LT(r.trajectory.horizon(), 150u);
    EXPECT_EQ(r.trajectory.states.size(), r.trajectory.controls.size() + 1);
}

// With unbounded torque the linear law swings the pendulum up on its own,
// but at a far higher cost than an optimized transfer.
TEST(LqrRollout, HangingPendulumIsCostly) {
    const Bundled b = bundled("pendulum");
    const RiccatiSolution sol = solve_dare(b.lin, b.cost);
    const LqrRollout r = lqr_rollout(b.model, b.cost, sol.K, Vector::Zero(2), 150, 0.1);
    EXPECT_FALSE(r.diverged);
    EXPECT_GT(r.trajectory.total_cost, 300.0);
}

TEST(LqrRollout, StepCostsUseErrorCoordinates) {
    const Bundled b = bundled("pendulum");
    const RiccatiSolution sol = solve_dare(b.lin, b.cost);
    const LqrRollout r = lqr_rollout(b.model, b.cost, sol.K, vec({3.0, 0.1}), 10, 0.1);
    for (std::size_t t = 0; t < r.trajectory.horizon(); ++t) {
        const Vector e = error_coords(b.model, r.trajectory.states[t]);
        EXPECT_DOUBLE_EQ(r.trajectory.step_costs[t], b.cost(e, r.trajectory.controls[t]));
        EXPECT_LE((r.trajectory.controls[t] + sol.K * e).norm(), 1e-12);
    }
}

}  // namespace
}  // namespace ihreg
