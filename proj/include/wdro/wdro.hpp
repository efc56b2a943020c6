// Copyright 2026 The wdro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "wdro/algorithm.hpp"
#include "wdro/counterexample.hpp"
#include "wdro/error.hpp"
#include "wdro/experiments.hpp"
#include "wdro/facility_location.hpp"
#include "wdro/linalg.hpp"
#include "wdro/lp_core.hpp"
#include "wdro/master.hpp"
#include "wdro/model.hpp"
#include "wdro/model_json.hpp"
#include "wdro/parallel.hpp"
#include "wdro/second_stage.hpp"
#include "wdro/separation.hpp"
