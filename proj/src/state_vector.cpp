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

#include "mqtm/state_vector.hpp"

#include <cmath>
#include <stdexcept>

namespace mqtm {

StateVector::StateVector(size_t num_qubits, std::vector<cdouble> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    if (amps_.size() != (size_t{1} << num_qubits_)) {
        throw std::invalid_argument("amplitude count must be 2^num_qubits");
    }
    double n2 = norm_squared();
    if (std::abs(n2 - 1.0) > 1e-10) {
        throw std::invalid_argument("state vector is not normalized");
    }
}

StateVector StateVector::raw(size_t num_qubits, std::vector<cdouble> amplitudes) {
    if (amplitudes.size() != (size_t{1} << num_qubits)) {
        throw std::invalid_argument("amplitude count must be 2^num_qubits");
    }
    StateVector s;
    s.num_qubits_ = num_qubits;
    s.amps_ = std::move(amplitudes);
    return s;
}

StateVector StateVector::zero_state(size_t num_qubits) {
    return basis_state(num_qubits, 0);
}

StateVector StateVector::basis_state(size_t num_qubits, uint64_t index) {
    if (index >= (uint64_t{1} << num_qubits)) {
        throw std::out_of_range("basis index out of range");
    }
    StateVector s;
    s.num_qubits_ = num_qubits;
    s.amps_.assign(size_t{1} << num_qubits, cdouble(0, 0));
    s.amps_[index] = cdouble(1, 0);
    return s;
}

StateVector StateVector::from_bits(const std::string &bits) {
    uint64_t index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bit string may only contain 0 and 1");
        }
        index = index * 2 + (c - '0');
    }
    return basis_state(bits.size(), index);
}

double StateVector::norm_squared() const {
    double n = 0.0;
    for (const cdouble &a : amps_) {
        n += std::norm(a);
    }
    return n;
}

void StateVector::renormalize() {
    double n = std::sqrt(norm_squared());
    if (n < 1e-12) {
        throw std::runtime_error("cannot renormalize a near-zero vector");
    }
    for (cdouble &a : amps_) {
        a /= n;
    }
}

StateVector StateVector::tensor(const StateVector &other) const {
    StateVector out;
    out.num_qubits_ = num_qubits_ + other.num_qubits_;
    out.amps_.assign(amps_.size() * other.amps_.size(), cdouble(0, 0));
    for (size_t i = 0; i < amps_.size(); i++) {
        if (amps_[i] == cdouble(0, 0)) {
            continue;
        }
        for (size_t j = 0; j < other.amps_.size(); j++) {
            out.amps_[i * other.amps_.size() + j] = amps_[i] * other.amps_[j];
        }
    }
    return out;
}

cdouble inner_product(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("dimension mismatch");
    }
    cdouble acc(0, 0);
    for (size_t i = 0; i < a.dim(); i++) {
        acc += std::conj(a.amplitude(i)) * b.amplitude(i);
    }
    return acc;
}

}  // namespace mqtm
