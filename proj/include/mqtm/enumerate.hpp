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

#include <vector>

#include "mqtm/rng.hpp"
#include "mqtm/state_vector.hpp"

namespace mqtm {

struct EnumeratedPath {
    double probability;
    std::vector<double> outcomes;
    StateVector state;
};

namespace internal {
struct PrunedPath {};
}  // namespace internal

/// Exhaustively enumerates every outcome path of an imperative measurement
/// procedure. `body(reg, chooser)` must route all randomness through the
/// chooser; it is replayed once per path on a fresh copy of `initial`.
/// Paths whose probability falls below `min_probability` are dropped.
template <typename Body>
std::vector<EnumeratedPath> enumerate_paths(const StateVector &initial, Body body,
                                            double min_probability = 0.0) {
    std::vector<EnumeratedPath> results;
    std::vector<std::vector<size_t>> stack{{}};
    while (!stack.empty()) {
        std::vector<size_t> script = std::move(stack.back());
        stack.pop_back();

        StateVector reg = initial;
        double prob = 1.0;
        std::vector<double> outcomes;
        size_t k = 0;
        std::vector<std::vector<size_t>> siblings;
        OutcomeChooser chooser = [&](const std::vector<OutcomeOption> &options) -> size_t {
            size_t choice;
            if (k < script.size()) {
                choice = script[k];
            } else {
                choice = 0;
                script.push_back(0);
                for (size_t j = 1; j < options.size(); j++) {
                    std::vector<size_t> alt(script.begin(), script.begin() + k);
                    alt.push_back(j);
                    siblings.push_back(std::move(alt));
                }
            }
            prob *= options[choice].probability;
            outcomes.push_back(options[choice].eigenvalue);
            k++;
            if (prob < min_probability) {
                throw internal::PrunedPath{};
            }
            return choice;
        };
        bool pruned = false;
        try {
            body(reg, chooser);
        } catch (const internal::PrunedPath &) {
            pruned = true;
        }
        for (auto &alt : siblings) {
            stack.push_back(std::move(alt));
        }
        if (!pruned) {
            results.push_back({prob, std::move(outcomes), std::move(reg)});
        }
    }
    return results;
}

}  // namespace mqtm
