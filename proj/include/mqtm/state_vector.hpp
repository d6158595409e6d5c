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

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "mqtm/pauli.hpp"

namespace mqtm {

/// Normalized amplitude vector over an n-qubit register.
///
/// Basis convention: qubit 0 is the leftmost tensor factor, i.e. the most
/// significant bit of the basis index. |q0 q1 ... q_{n-1}> has index
/// q0*2^{n-1} + ... + q_{n-1}.
class StateVector {
   public:
    /// The empty register (a scalar 1); tensoring with it is a no-op.
    StateVector() : num_qubits_(0), amps_{cdouble(1, 0)} {}

    StateVector(size_t num_qubits, std::vector<cdouble> amplitudes);

    /// Skips the normalization check. Projection and path accumulation
    /// legitimately produce unnormalized vectors.
    static StateVector raw(size_t num_qubits, std::vector<cdouble> amplitudes);

    static StateVector zero_state(size_t num_qubits);
    static StateVector basis_state(size_t num_qubits, uint64_t index);
    /// Parses a bit string such as "011" into the matching basis state.
    static StateVector from_bits(const std::string &bits);

    size_t num_qubits() const { return num_qubits_; }
    size_t dim() const { return amps_.size(); }
    const std::vector<cdouble> &amplitudes() const { return amps_; }
    cdouble amplitude(uint64_t index) const { return amps_[index]; }

    double norm_squared() const;
    /// Divides by the norm; throws if the norm is below 1e-12.
    void renormalize();

    /// Bit of `qubit` within a basis index.
    int bit_of(uint64_t index, size_t qubit) const {
        return static_cast<int>((index >> (num_qubits_ - 1 - qubit)) & 1);
    }

    StateVector tensor(const StateVector &other) const;

    bool operator==(const StateVector &other) const = default;

   private:
    size_t num_qubits_;
    std::vector<cdouble> amps_;
};

cdouble inner_product(const StateVector &a, const StateVector &b);

}  // namespace mqtm
