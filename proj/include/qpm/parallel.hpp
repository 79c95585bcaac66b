// Copyright 2026 The qpm Authors
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

#include <functional>

namespace qpm {

/// Upper bound on worker threads used by parallel_for (0 = hardware concurrency).
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n). Exceptions from workers are rethrown on the caller.
/// Each index must be independent of every other.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace qpm
