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

#include "ihreg/cost.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ihreg {
namespace {

using testing::vec;

Matrix spd2() {
    Matrix P(2, 2);
    P << 2.0, 0.5, 0.5, 1.0;
    return P;
}

/// A point with e'Pe equal to `level` along direction d.
Vector on_level(const Matrix& P, Vector d, double level) {
    return d * std::sqrt(level / d.dot(P * d));
}

TEST(IncrementalCost, ZeroAtOrigin) {
    const QuadraticCost c = QuadraticCost::diagonal(vec({1.0, 0.1}), vec({0.1}));
    EXPECT_EQ(incremental_cost(c, vec({0.0, 0.0}), vec({0.0})), 0.0);
}

TEST(IncrementalCost, IdentityWeightsExample) {
    const QuadraticCost c(Matrix::Identity(2, 2), Matrix::Identity(1, 1));
    EXPECT_DOUBLE_EQ(incremental_cost(c, vec({1.0, 2.0}), vec({3.0})), 14.0);
}

TEST(IncrementalCost, EvenInArguments) {
    const QuadraticCost c = QuadraticCost::diagonal(vec({1.0, 1.0, 0.1, 0.1}), vec({0.1}));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 50; ++k) {
        const Vector e = vec({normal(rng), normal(rng), normal(rng), normal(rng)});
        const Vector u = vec({normal(rng)});
        EXPECT_DOUBLE_EQ(c(e, u), c(-e, -u));
        EXPECT_GT(c(e, u), 0.0);
    }
}

TEST(IncrementalCost, GradientVanishesAtOrigin) {
    const QuadraticCost c = QuadraticCost::diagonal(vec({1.0, 0.1}), vec({0.1}));
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
        Vector z = Vector::Zero(3);
        z[i] = h;
        const double plus = c(z.head(2), z.tail(1));
        const double minus = c(-z.head(2), -z.tail(1));
        EXPECT_NEAR((plus - minus) / (2 * h), 0.0, 1e-12);
    }
}

TEST(IncrementalCost, RejectsBadWeights) {
    Matrix asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    EXPECT_THROW(QuadraticCost(asym, Matrix::Identity(1, 1)), std::invalid_argument);
    EXPECT_THROW(QuadraticCost(-Matrix::Identity(2, 2), Matrix::Identity(1, 1)), std::invalid_argument);
    EXPECT_THROW(QuadraticCost(Matrix::Identity(2, 2), Matrix::Zero(1, 1)), std::invalid_argument);
    EXPECT_THROW(QuadraticCost(Matrix::Identity(2, 3), Matrix::Identity(1, 1)), std::invalid_argument);
    EXPECT_NO_THROW(QuadraticCost(Matrix::Zero(2, 2), Matrix::Identity(1, 1)));
}

TEST(IncrementalCost, DimensionMismatchThrows) {
    const QuadraticCost c(Matrix::Identity(2, 2), Matrix::Identity(1, 1));
    EXPECT_THROW(c(vec({1.0}), vec({1.0})), std::invalid_argument);
    EXPECT_THROW(c(vec({1.0, 1.0}), vec({1.0, 2.0})), std::invalid_argument);
}

TEST(TerminalCostEval, Kinds) {
    const Matrix P = spd2();
    const Vector e = vec({0.3, -0.4});
    EXPECT_EQ(terminal_cost_eval(TerminalCost::none(), e), 0.0);
    EXPECT_EQ(terminal_cost_eval(TerminalCost::riccati(P), vec({0.0, 0.0})), 0.0);
    EXPECT_DOUBLE_EQ(terminal_cost_eval(TerminalCost::riccati(P), e), e.dot(P * e));
}

TEST(TerminalCostEval, FloorActiveInside) {
    const Matrix P = spd2();
    const Vector e = on_level(P, vec({1.0, 2.0}), 3.0);
    EXPECT_DOUBLE_EQ(terminal_cost_eval(TerminalCost::floored(P, 5.0), e), 5.0);
    EXPECT_FALSE(TerminalCost::floored(P, 5.0).active_quadratic(e));
}

TEST(TerminalCostEval, FloorInactiveOutside) {
    const Matrix P = spd2();
    const Vector e = on_level(P, vec({1.0, 2.0}), 9.0);
    EXPECT_NEAR(terminal_cost_eval(TerminalCost::floored(P, 5.0), e), 9.0, 1e-12);
    EXPECT_TRUE(TerminalCost::floored(P, 5.0).active_quadratic(e));
}

TEST(TerminalCostEval, FlooredDominatesRiccati) {
    const Matrix P = spd2();
    const TerminalCost r = TerminalCost::riccati(P);
    const TerminalCost f = TerminalCost::floored(P, 2.0);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 200; ++k) {
        const Vector e = vec({normal(rng), normal(rng)});
        EXPECT_GE(f(e), r(e));
        EXPECT_EQ(f(e) == r(e), r(e) >= 2.0);
    }
}

TEST(TerminalCostEval, Validation) {
    EXPECT_THROW(TerminalCost::floored(spd2(), -1.0), std::invalid_argument);
    EXPECT_THROW(TerminalCost::riccati(spd2())(vec({1.0})), std::invalid_argument);
}

}  // namespace
}  // namespace ihreg
