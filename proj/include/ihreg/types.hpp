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

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ihreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a computation produces non-finite values (integration blowup,
/// singular factorizations, non-finite Jacobians).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, long step = -1)
        : std::runtime_error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what),
          step_(step) {}

    /// Index of the offending step, or -1 when not tied to a rollout step.
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// Raised when an iterative solver exhausts its iteration budget.
class NoConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_size(const Vector& v, Eigen::Index n, const char* what) {
    if (v.size() != n) {
        throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(n) +
                                    ", got " + std::to_string(v.size()));
    }
}

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
    }
}

inline double quad_form(const Matrix& m, const Vector& v) { return v.dot(m * v); }

}  // namespace detail

}  // namespace ihreg
