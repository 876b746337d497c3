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

#include "ihreg/config.hpp"
#include "ihreg/cost.hpp"
#include "ihreg/dynamics.hpp"
#include "ihreg/experiment.hpp"
#include "ihreg/ilqr.hpp"
#include "ihreg/io.hpp"
#include "ihreg/regularizer.hpp"
#include "ihreg/result.hpp"
#include "ihreg/riccati.hpp"
#include "ihreg/trajectory.hpp"
