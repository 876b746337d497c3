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

#include <numeric>
#include <vector>

namespace ihreg {

/// Time-indexed states (raw coordinates) and controls with per-step costs.
/// states has one more entry than controls.
struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> controls;
    std::vector<double> step_costs;
    double terminal_cost_value = 0.0;
    double total_cost = 0.0;

    std::size_t horizon() const noexcept { return controls.size(); }

    double running_cost() const { return std::accumulate(step_costs.begin(), step_costs.end(), 0.0); }

    void recompute_total() { total_cost = running_cost() + terminal_cost_value; }
};

}  // namespace ihreg
