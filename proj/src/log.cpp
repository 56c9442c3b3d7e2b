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

#include "qmlp/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace qmlp {
namespace {

std::atomic<std::size_t> g_warnings{0};
std::atomic<bool> g_quiet{false};
std::mutex g_stream_mutex;

}  // namespace

void warn(std::string_view message) {
    g_warnings.fetch_add(1, std::memory_order_relaxed);
    if (g_quiet.load(std::memory_order_relaxed)) {
        return;
    }
    std::lock_guard lock(g_stream_mutex);
    std::cerr << "[qmlp] warning: " << message << '\n';
}

void info(std::string_view message) {
    if (g_quiet.load(std::memory_order_relaxed)) {
        return;
    }
    std::lock_guard lock(g_stream_mutex);
    std::cerr << "[qmlp] " << message << '\n';
}

std::size_t warning_count() { return g_warnings.load(std::memory_order_relaxed); }

void set_quiet(bool quiet) { g_quiet.store(quiet, std::memory_order_relaxed); }

}  // namespace qmlp
