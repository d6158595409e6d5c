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

#include <cstdint>
#include <functional>
#include <vector>

namespace mqtm {

inline uint64_t splitmix64(uint64_t &state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. All floating point draws are derived from
/// the top 53 bits of a splitmix64 word, so a seed produces the same trace
/// on every platform.
class RandomSource {
   public:
    explicit RandomSource(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Derives an independent child stream. Used to give each protocol
    /// round or verification trial its own stream from one root seed.
    RandomSource child(uint64_t label) {
        uint64_t s = state_ + 0x632be59bd9b4e019ULL * (label + 1);
        s ^= splitmix64(s);
        return RandomSource(s);
    }

   private:
    uint64_t state_;
};

/// One entry of a measurement's outcome distribution, as shown to an
/// OutcomeChooser.
struct OutcomeOption {
    double eigenvalue;
    double probability;
};

/// Picks which outcome of a measurement occurs. Sampling, scripted replay,
/// and exhaustive enumeration are all implemented as choosers.
using OutcomeChooser = std::function<size_t(const std::vector<OutcomeOption> &)>;

/// Chooser that samples according to the probabilities.
inline OutcomeChooser sampling_chooser(RandomSource &rng) {
    return [&rng](const std::vector<OutcomeOption> &options) -> size_t {
        double u = rng.next_double();
        double acc = 0.0;
        for (size_t k = 0; k < options.size(); k++) {
            acc += options[k].probability;
            if (u < acc) {
                return k;
            }
        }
        return options.size() - 1;
    };
}

}  // namespace mqtm
