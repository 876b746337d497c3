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

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace ihreg {

/// Continuous-time vector field dx/dt = g(x, u).
using VectorField = std::function<Vector(const Vector&, const Vector&)>;

/**
 * @brief A continuous-time plant together with the equilibrium it is regulated to.
 *
 * The model is an immutable description. All solver math runs in error
 * coordinates relative to goal(); entries listed in angle_indices() are
 * identified modulo 2*pi when forming those coordinates.
 */
class DynamicsModel {
public:
    DynamicsModel(std::string id, int n, int p, Vector goal, std::vector<int> angle_indices,
                  std::map<std::string, double> params, VectorField field)
        : id_(std::move(id)),
          n_(n),
          p_(p),
          goal_(std::move(goal)),
          angle_indices_(std::move(angle_indices)),
          params_(std::move(params)),
          field_(std::move(field)) {
        if (n_ <= 0 || p_ <= 0) throw std::invalid_argument("DynamicsModel: dimensions must be positive");
        detail::require_size(goal_, n_, "DynamicsModel goal");
        for (int i : angle_indices_) {
            if (i < 0 || i >= n_) throw std::invalid_argument("DynamicsModel: angle index out of range");
        }
        if (!field_) throw std::invalid_argument("DynamicsModel: empty vector field");
    }

    const std::string& id() const noexcept { return id_; }
    int n() const noexcept { return n_; }
    int p() const noexcept { return p_; }
    const Vector& goal() const noexcept { return goal_; }
    const std::vector<int>& angle_indices() const noexcept { return angle_indices_; }
    const std::map<std::string, double>& params() const noexcept { return params_; }

    Vector derivative(const Vector& x, const Vector& u) const { return field_(x, u); }

    /// Same plant regulated to a different equilibrium.
    DynamicsModel with_goal(Vector goal) const {
        return DynamicsModel(id_, n_, p_, std::move(goal), angle_indices_, params_, field_);
    }

private:
    std::string id_;
    int n_;
    int p_;
    Vector goal_;
    std::vector<int> angle_indices_;
    std::map<std::string, double> params_;
    VectorField field_;
};

/// Wraps an angle into [-pi, pi). The lower end is kept so that the
/// hanging configuration maps to -pi relative to an upright goal.
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = a - two_pi * std::floor((a + std::numbers::pi) / two_pi);
    if (w >= std::numbers::pi) w -= two_pi;  // floor rounding at the upper edge
    return w;
}

/// x - goal with angle entries wrapped.
inline Vector error_coords(const DynamicsModel& model, const Vector& x) {
    detail::require_size(x, model.n(), "error_coords state");
    Vector e = x - model.goal();
    for (int i : model.angle_indices()) e[i] = wrap_angle(e[i]);
    return e;
}

inline Vector from_error_coords(const DynamicsModel& model, const Vector& e) {
    detail::require_size(e, model.n(), "from_error_coords state");
    return model.goal() + e;
}

/// One classical RK4 step with the control held constant over the step.
/// Angles are not wrapped; the raw integration result is returned.
inline Vector rk4_step(const DynamicsModel& model, const Vector& x, const Vector& u, double dt) {
    detail::require_size(x, model.n(), "rk4_step state");
    detail::require_size(u, model.p(), "rk4_step control");
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");

    const Vector k1 = model.derivative(x, u);
    const Vector k2 = model.derivative(x + 0.5 * dt * k1, u);
    const Vector k3 = model.derivative(x + 0.5 * dt * k2, u);
    const Vector k4 = model.derivative(x + dt * k3, u);
    Vector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) throw NumericalError("rk4_step produced a non-finite state");
    return next;
}

struct LinearizedSystem {
    Matrix A;
    Matrix B;
    double dt = 0.0;
};

/// Discrete-time Jacobians of the RK4 map at an arbitrary (x, u), by central
/// differences in raw coordinates.
inline LinearizedSystem discrete_jacobians(const DynamicsModel& model, const Vector& x, const Vector& u,
                                           double dt, double eps_x = 1e-5, double eps_u = 1e-5) {
    const int n = model.n();
    const int p = model.p();
    LinearizedSystem lin{Matrix(n, n), Matrix(n, p), dt};
    Vector xp = x;
    for (int j = 0; j < n; ++j) {
        xp[j] = x[j] + eps_x;
        const Vector fp = rk4_step(model, xp, u, dt);
        xp[j] = x[j] - eps_x;
        const Vector fm = rk4_step(model, xp, u, dt);
        xp[j] = x[j];
        lin.A.col(j) = (fp - fm) / (2.0 * eps_x);
    }
    Vector up = u;
    for (int j = 0; j < p; ++j) {
        up[j] = u[j] + eps_u;
        const Vector fp = rk4_step(model, x, up, dt);
        up[j] = u[j] - eps_u;
        const Vector fm = rk4_step(model, x, up, dt);
        up[j] = u[j];
        lin.B.col(j) = (fp - fm) / (2.0 * eps_u);
    }
    if (!lin.A.allFinite() || !lin.B.allFinite()) throw NumericalError("non-finite Jacobian entries");
    return lin;
}

/// Linearization of the discrete map x_tilde -> error_coords(rk4_step(goal + x_tilde, u)) at the goal.
inline LinearizedSystem linearize_discrete(const DynamicsModel& model, double dt, double eps_x = 1e-5,
                                           double eps_u = 1e-5) {
    if (!(dt > 0.0)) throw std::invalid_argument("linearize_discrete: dt must be positive");
    if (!(eps_x > 0.0) || !(eps_u > 0.0)) throw std::invalid_argument("linearize_discrete: eps must be positive");
    const int n = model.n();
    const int p = model.p();
    auto step = [&](const Vector& e, const Vector& u) {
        return error_coords(model, rk4_step(model, from_error_coords(model, e), u, dt));
    };
    const Vector u0 = Vector::Zero(p);
    LinearizedSystem lin{Matrix(n, n), Matrix(n, p), dt};
    for (int j = 0; j < n; ++j) {
        Vector e = Vector::Zero(n);
        e[j] = eps_x;
        const Vector fp = step(e, u0);
        e[j] = -eps_x;
        const Vector fm = step(e, u0);
        lin.A.col(j) = (fp - fm) / (2.0 * eps_x);
    }
    for (int j = 0; j < p; ++j) {
        Vector u = Vector::Zero(p);
        u[j] = eps_u;
        const Vector fp = step(Vector::Zero(n), u);
        u[j] = -eps_u;
        const Vector fm = step(Vector::Zero(n), u);
        lin.B.col(j) = (fp - fm) / (2.0 * eps_u);
    }
    if (!lin.A.allFinite() || !lin.B.allFinite()) throw NumericalError("non-finite Jacobian entries");
    return lin;
}

inline Eigen::Index controllability_rank(const Matrix& A, const Matrix& B) {
    const Eigen::Index n = A.rows();
    Matrix C(n, n * B.cols());
    Matrix block = B;
    for (Eigen::Index k = 0; k < n; ++k) {
        C.middleCols(k * B.cols(), B.cols()) = block;
        block = A * block;
    }
    return Eigen::FullPivLU<Matrix>(C).rank();
}

// ---------------------------------------------------------------------------
// Bundled plants

namespace detail {

inline double param_or(const std::map<std::string, double>& overrides, const std::string& key, double fallback) {
    auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
}

inline void reject_unknown(const std::map<std::string, double>& overrides, const std::vector<std::string>& known,
                           const std::string& model) {
    for (const auto& [key, value] : overrides) {
        bool found = false;
        for (const auto& k : known) found = found || (k == key);
        if (!found) throw std::invalid_argument("unknown parameter '" + key + "' for model " + model);
        if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + key + "' is not finite");
    }
}

}  // namespace detail

/// Damped pendulum, state (theta, theta_dot), theta = 0 hanging. Goal is upright.
inline DynamicsModel make_pendulum(const std::map<std::string, double>& overrides = {}) {
    detail::reject_unknown(overrides, {"mass", "length", "gravity", "damping"}, "pendulum");
    const double m = detail::param_or(overrides, "mass", 1.0);
    const double l = detail::param_or(overrides, "length", 1.0);
    const double g = detail::param_or(overrides, "gravity", 9.81);
    const double b = detail::param_or(overrides, "damping", 0.1);
    if (!(m > 0.0) || !(l > 0.0)) throw std::invalid_argument("pendulum: mass and length must be positive");

    auto field = [m, l, g, b](const Vector& x, const Vector& u) {
        Vector dx(2);
        dx[0] = x[1];
        dx[1] = (u[0] - b * x[1] - m * g * l * std::sin(x[0])) / (m * l * l);
        return dx;
    };
    Vector goal(2);
    goal << std::numbers::pi, 0.0;
    return DynamicsModel("pendulum", 2, 1, goal, {0},
                         {{"mass", m}, {"length", l}, {"gravity", g}, {"damping", b}}, field);
}

/**
 * Cart-pole with a uniform pole, state (x, theta, x_dot, theta_dot), theta = 0
 * hanging, control is the horizontal force on the cart. Frictionless.
 */
inline DynamicsModel make_cartpole(const std::map<std::string, double>& overrides = {}) {
    detail::reject_unknown(overrides, {"cart_mass", "pole_mass", "pole_half_length", "gravity"}, "cartpole");
    const double mc = detail::param_or(overrides, "cart_mass", 1.0);
    const double mp = detail::param_or(overrides, "pole_mass", 0.1);
    const double l = detail::param_or(overrides, "pole_half_length", 0.5);
    const double g = detail::param_or(overrides, "gravity", 9.81);
    if (!(mc > 0.0) || !(mp > 0.0) || !(l > 0.0)) {
        throw std::invalid_argument("cartpole: masses and length must be positive");
    }

    auto field = [mc, mp, l, g](const Vector& x, const Vector& u) {
        const double total = mc + mp;
        const double s = std::sin(x[1]);
        const double c = std::cos(x[1]);
        const double thd = x[3];
        const double temp = (u[0] - mp * l * thd * thd * s) / total;
        const double thdd = (-g * s + c * temp) / (l * (4.0 / 3.0 - mp * c * c / total));
        const double xdd = temp + mp * l * thdd * c / total;
        Vector dx(4);
        dx << x[2], thd, xdd, thdd;
        return dx;
    };
    Vector goal(4);
    goal << 0.0, std::numbers::pi, 0.0, 0.0;
    return DynamicsModel("cartpole", 4, 1, goal, {1},
                         {{"cart_mass", mc}, {"pole_mass", mp}, {"pole_half_length", l}, {"gravity", g}}, field);
}

/// Linear plant dx/dt = F x + G u regulated to the origin (no angle states).
inline DynamicsModel make_linear(const Matrix& F, const Matrix& G, std::string id = "linear") {
    if (F.rows() != F.cols() || G.rows() != F.rows() || G.cols() == 0) {
        throw std::invalid_argument("make_linear: inconsistent F, G shapes");
    }
    auto field = [F, G](const Vector& x, const Vector& u) -> Vector { return F * x + G * u; };
    return DynamicsModel(std::move(id), static_cast<int>(F.rows()), static_cast<int>(G.cols()),
                         Vector::Zero(F.rows()), {}, {}, field);
}

inline DynamicsModel make_double_integrator() {
    Matrix F(2, 2);
    F << 0.0, 1.0, 0.0, 0.0;
    Matrix G(2, 1);
    G << 0.0, 1.0;
    return make_linear(F, G, "double_integrator");
}

/// Model lookup by string id ("pendulum", "cartpole", "double_integrator").
inline DynamicsModel make_model(const std::string& id, const std::map<std::string, double>& overrides = {}) {
    if (id == "pendulum") return make_pendulum(overrides);
    if (id == "cartpole") return make_cartpole(overrides);
    if (id == "double_integrator") {
        if (!overrides.empty()) throw std::invalid_argument("double_integrator takes no parameters");
        return make_double_integrator();
    }
    throw std::invalid_argument("unknown model id '" + id + "'");
}

}  // namespace ihreg
