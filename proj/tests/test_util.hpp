// Copyright 2026 The MQTM Authors
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

#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mqtm/measurement.hpp"
#include "mqtm/rng.hpp"
#include "mqtm/state_vector.hpp"

namespace mqtm::test {

inline StateVector normalized(std::vector<cdouble> amps) {
    double n2 = 0;
    for (auto &a : amps) {
        n2 += std::norm(a);
    }
    for (auto &a : amps) {
        a /= std::sqrt(n2);
    }
    size_t n = 0;
    while ((size_t{1} << n) < amps.size()) {
        n++;
    }
    return StateVector(n, std::move(amps));
}

/// Haar-ish random n-qubit state: complex Gaussian amplitudes, normalized.
inline StateVector random_state(size_t num_qubits, RandomSource &rng) {
    size_t dim = size_t{1} << num_qubits;
    std::vector<cdouble> amps(dim);
    for (auto &a : amps) {
        double u1 = rng.next_double(), u2 = rng.next_double();
        double u3 = rng.next_double(), u4 = rng.next_double();
        double r1 = std::sqrt(-2.0 * std::log(u1 + 1e-300));
        double r2 = std::sqrt(-2.0 * std::log(u3 + 1e-300));
        a = cdouble(r1 * std::cos(2 * std::numbers::pi * u2),
                    r2 * std::cos(2 * std::numbers::pi * u4));
    }
    return normalized(std::move(amps));
}

inline StateVector random_product_state(size_t num_qubits, RandomSource &rng) {
    StateVector s;
    for (size_t q = 0; q < num_qubits; q++) {
        s = s.tensor(haar_random_qubit(rng));
    }
    return s;
}

/// Chooser that replays a fixed list of choice indices.
inline OutcomeChooser scripted_chooser(std::vector<size_t> script) {
    auto pos = std::make_shared<size_t>(0);
    auto data = std::make_shared<std::vector<size_t>>(std::move(script));
    return [pos, data](const std::vector<OutcomeOption> &options) -> size_t {
        if (*pos >= data->size()) {
            throw std::runtime_error("scripted chooser exhausted");
        }
        size_t c = (*data)[(*pos)++];
        if (c >= options.size()) {
            throw std::runtime_error("scripted choice out of range");
        }
        return c;
    };
}

/// Chooser that picks the branch whose eigenvalue matches each scripted
/// value (within 1e-9).
inline OutcomeChooser eigenvalue_chooser(std::vector<double> values) {
    auto pos = std::make_shared<size_t>(0);
    auto data = std::make_shared<std::vector<double>>(std::move(values));
    return [pos, data](const std::vector<OutcomeOption> &options) -> size_t {
        if (*pos >= data->size()) {
            throw std::runtime_error("eigenvalue chooser exhausted");
        }
        double want = (*data)[(*pos)++];
        for (size_t k = 0; k < options.size(); k++) {
            if (std::abs(options[k].eigenvalue - want) < 1e-9) {
                return k;
            }
        }
        throw std::runtime_error("requested eigenvalue not reachable");
    };
}

}  // namespace mqtm::test
