/*
 * Copyright 2026 The envmx Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "envmx/array_model.hpp"
#include "envmx/cell_library.hpp"
#include "envmx/common.hpp"
#include "envmx/csv.hpp"
#include "envmx/evaluation.hpp"
#include "envmx/fault_injection.hpp"
#include "envmx/predicate.hpp"
#include "envmx/result_table.hpp"
#include "envmx/rng.hpp"
#include "envmx/sweep_engine.hpp"
#include "envmx/traffic.hpp"
