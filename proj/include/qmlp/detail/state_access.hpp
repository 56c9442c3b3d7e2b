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

#include <utility>
#include <vector>

#include "qmlp/simulator.hpp"

namespace qmlp {

// Library-internal: construction without the norm check and in-place access.
struct StateAccess {
    static std::vector<Complex>& data(StateVector& s) { return s.amplitudes_; }
    static StateVector make(std::size_t num_qubits, std::vector<Complex> amplitudes) {
        return StateVector(num_qubits, std::move(amplitudes));
    }
};

}  // namespace qmlp
