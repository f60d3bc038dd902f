// Copyright 2026 The ensq Authors
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

#include "ensq/analysis.hpp"
#include "ensq/basis.hpp"
#include "ensq/common.hpp"
#include "ensq/dynamics.hpp"
#include "ensq/ensemble.hpp"
#include "ensq/entanglement.hpp"
#include "ensq/hamiltonian.hpp"
#include "ensq/measurement.hpp"
#include "ensq/program.hpp"
#include "ensq/program_text.hpp"
#include "ensq/sequences.hpp"
