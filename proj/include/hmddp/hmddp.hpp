/*
 * Copyright 2026 The hmddp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef HMDDP_HMDDP_HPP
#define HMDDP_HMDDP_HPP

#include "hmddp/al_stage.hpp"
#include "hmddp/core.hpp"
#include "hmddp/globalization.hpp"
#include "hmddp/hybrid.hpp"
#include "hmddp/mddp.hpp"
#include "hmddp/rlb_stage.hpp"
#include "hmddp/systems/benchmarks.hpp"
#include "hmddp/systems/car2d.hpp"
#include "hmddp/systems/cartpole.hpp"
#include "hmddp/systems/derivative_check.hpp"
#include "hmddp/systems/linear.hpp"
#include "hmddp/systems/quadrotor.hpp"
#include "hmddp/systems/rk4.hpp"

#endif  // HMDDP_HMDDP_HPP
