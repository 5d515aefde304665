//
// Copyright 2026 The idblind Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef IDBLIND_IDBLIND_HPP
#define IDBLIND_IDBLIND_HPP

#include "idblind/adversary.hpp"
#include "idblind/constants.hpp"
#include "idblind/core.hpp"
#include "idblind/eval.hpp"
#include "idblind/io.hpp"
#include "idblind/optimal.hpp"
#include "idblind/policy.hpp"
#include "idblind/random.hpp"
#include "idblind/repro.hpp"

#endif  // IDBLIND_IDBLIND_HPP
