// Copyright 2026 The CPatchBLS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPATCHBLS_CPATCHBLS_HPP
#define CPATCHBLS_CPATCHBLS_HPP

#include "cpatchbls/blscore.hpp"
#include "cpatchbls/commands.hpp"
#include "cpatchbls/contrast.hpp"
#include "cpatchbls/dataio.hpp"
#include "cpatchbls/ensemble.hpp"
#include "cpatchbls/evalmetrics.hpp"
#include "cpatchbls/model_io.hpp"
#include "cpatchbls/patching.hpp"
#include "cpatchbls/report.hpp"
#include "cpatchbls/skp.hpp"
#include "cpatchbls/synth.hpp"

#endif  // CPATCHBLS_CPATCHBLS_HPP
