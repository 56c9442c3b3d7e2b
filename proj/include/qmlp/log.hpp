// Copyright 2026 The qmlp Authors
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

#include <cstddef>
#include <string_view>

namespace qmlp {

/// Emits a warning on stderr and bumps the process-wide warning counter.
void warn(std::string_view message);

/// Informational line on stderr; suppressed by set_quiet(true).
void info(std::string_view message);

std::size_t warning_count();

void set_quiet(bool quiet);

}  // namespace qmlp
