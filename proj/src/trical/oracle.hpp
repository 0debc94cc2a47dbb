// Copyright 2026 The TriCal Authors
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

#include <cstdint>
#include <functional>
#include <string>

namespace trical {

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

using OracleSink = std::function<void(const OracleCheck&)>;

/// Runs the brute-force reference checks against the optimized implementations and
/// reports each through `sink`. Returns true when all pass.
bool run_oracles(std::uint64_t seed, const OracleSink& sink);

/// Gradient checks over `seeds` consecutive seeds; reports one line per seed.
bool run_gradchecks(std::uint64_t seed, int seeds, const OracleSink& sink, double* max_rel_error = nullptr);

}  // namespace trical
