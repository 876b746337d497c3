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

#include "ihreg/types.hpp"

#include <algorithm>

namespace ihreg {

/// Incremental cost c(x, u) = x'Qx + u'Ru in error coordinates.
class QuadraticCost {
public:
    QuadraticCost(Matrix Q, Matrix R) : Q_(std::move(Q)), R_(std::move(R)) {
        if (Q_.rows() != Q_.cols() || R_.rows() != R_.cols()) {
            throw std::invalid_argument("QuadraticCost: Q and R must be square");
        }
        if (!Q_.allFinite() || !R_.allFinite()) throw std::invalid_argument("QuadraticCost: non-finite weights");
        if (!Q_.isApprox(Q_.transpose(), 1e-12) || !R_.isApprox(R_.transpose(), 1e-12)) {
            throw std::invalid_argument("QuadraticCost: Q and R must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> qeig(Q_, Eigen::EigenvaluesOnly);
        if (qeig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q_.norm())) {
            throw std::invalid_argument("QuadraticCost: Q must be positive semidefinite");
        }
        if (Eigen::LLT<Matrix>(R_).info() != Eigen::Success) {
            throw std::invalid_argument("QuadraticCost: R must be positive definite");
        }
    }

    static QuadraticCost diagonal(const Vector& q, const Vector& r) {
        return QuadraticCost(q.asDiagonal().toDenseMatrix(), r.asDiagonal().toDenseMatrix());
    }

    const Matrix& Q() const noexcept { return Q_; }
    const Matrix& R() const noexcept { return R_; }
    Eigen::Index n() const noexcept { return Q_.rows(); }
    Eigen::Index p() const noexcept { return R_.rows(); }

    double operator()(const Vector& e, const Vector& u) const {
        detail::require_size(e, n(), "incremental_cost state");
        detail::require_size(u, p(), "incremental_cost control");
        return detail::quad_form(Q_, e) + detail::quad_form(R_, u);
    }

private:
    Matrix Q_;
    Matrix R_;
};

inline double incremental_cost(const QuadraticCost& cost, const Vector& e, const Vector& u) { return cost(e, u); }

enum class TerminalKind { none, riccati, riccati_floored };

/// Terminal cost Phi(x_T): zero, x'Px, or max(x'Px, M).
struct TerminalCost {
    TerminalKind kind = TerminalKind::none;
    Matrix P;
    double M = 0.0;

    static TerminalCost none() { return {}; }
    static TerminalCost riccati(Matrix P) { return {TerminalKind::riccati, std::move(P), 0.0}; }
    static TerminalCost floored(Matrix P, double M) {
        if (!(M >= 0.0)) throw std::invalid_argument("TerminalCost: floor M must be >= 0");
        return {TerminalKind::riccati_floored, std::move(P), M};
    }

    double operator()(const Vector& e) const {
        if (kind == TerminalKind::none) return 0.0;
        detail::require_size(e, P.rows(), "terminal_cost_eval state");
        const double v = detail::quad_form(P, e);
        return kind == TerminalKind::riccati ? v : std::max(v, M);
    }

    /// Gradient and Hessian of the active branch; a floored cost inside its
    /// level set contributes nothing.
    bool active_quadratic(const Vector& e) const {
        if (kind == TerminalKind::none) return false;
        if (kind == TerminalKind::riccati) return true;
        return detail::quad_form(P, e) > M;
    }
};

inline double terminal_cost_eval(const TerminalCost& tc, const Vector& e) { return tc(e); }

}  // namespace ihreg
