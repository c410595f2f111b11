// SPDX-License-Identifier: Apache-2.0
//
// mimo-pilot: channel estimation and pilot power allocation for multi-cell massive MIMO
// Copyright (C) 2026 The mimo-pilot authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef MIMO_PILOT_MIMO_PILOT_HPP
#define MIMO_PILOT_MIMO_PILOT_HPP

#include "airlink.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "estimators.hpp"
#include "harness.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "ppa.hpp"
#include "random.hpp"
#include "refsolver.hpp"
#include "scenario.hpp"
#include "stats.hpp"

#endif
