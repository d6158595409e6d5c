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

namespace mqtm {

using cdouble = std::complex<double>;

enum class Pauli : uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

/// (a * b) as i^phase * op.
struct PauliProduct {
    Pauli op;
    int phase;  // power of i, 0..3
};
PauliProduct pauli_multiply(Pauli a, Pauli b);

/// 2x2 matrix of a single Pauli, row-major.
std::vector<cdouble> pauli_matrix(Pauli p);

/// A phased tensor product of single-qubit Paulis: i^phase * (P_0 ⊗ ... ⊗ P_{k-1}).
class PauliOp {
   public:
    PauliOp() = default;
    explicit PauliOp(std::vector<Pauli> labels, int phase_exponent = 0)
        : labels_(std::move(labels)), phase_(((phase_exponent % 4) + 4) % 4) {}

    static PauliOp identity(size_t arity) { return PauliOp(std::vector<Pauli>(arity, Pauli::I)); }

    size_t arity() const { return labels_.size(); }
    Pauli label(size_t i) const { return labels_[i]; }
    int phase_exponent() const { return phase_; }

    /// Left product: returns (*this) * rhs with exact phase tracking.
    PauliOp times(const PauliOp &rhs) const;

    PauliOp transposed() const;  // Y^T = -Y
    PauliOp adjoint() const;     // conjugate of the phase; labels are Hermitian

    bool is_identity() const;
    bool is_identity_up_to_phase() const;
    bool same_up_to_phase(const PauliOp &other) const;
    bool operator==(const PauliOp &other) const {
        return labels_ == other.labels_ && phase_ == other.phase_;
    }

    /// Dense 2^k x 2^k matrix, row-major, including the phase.
    std::vector<cdouble> matrix() const;

    std::string str() const;

   private:
    std::vector<Pauli> labels_;
    int phase_ = 0;
};

}  // namespace mqtm
