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

#include "mqtm/pauli.hpp"

#include <stdexcept>

namespace mqtm {

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::I:
            return 'I';
        case Pauli::X:
            return 'X';
        case Pauli::Y:
            return 'Y';
        case Pauli::Z:
            return 'Z';
    }
    return '?';
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I':
            return Pauli::I;
        case 'X':
            return Pauli::X;
        case 'Y':
            return Pauli::Y;
        case 'Z':
            return Pauli::Z;
        default:
            throw std::invalid_argument(std::string("not a Pauli label: ") + c);
    }
}

PauliProduct pauli_multiply(Pauli a, Pauli b) {
    if (a == Pauli::I) {
        return {b, 0};
    }
    if (b == Pauli::I) {
        return {a, 0};
    }
    if (a == b) {
        return {Pauli::I, 0};
    }
    // Cyclic products carry +i, anti-cyclic -i (phase exponent 3).
    auto cyc = [](Pauli u, Pauli v, Pauli w) { return PauliProduct{w, 1}; };
    if (a == Pauli::X && b == Pauli::Y) return cyc(a, b, Pauli::Z);
    if (a == Pauli::Y && b == Pauli::Z) return cyc(a, b, Pauli::X);
    if (a == Pauli::Z && b == Pauli::X) return cyc(a, b, Pauli::Y);
    if (a == Pauli::Y && b == Pauli::X) return {Pauli::Z, 3};
    if (a == Pauli::Z && b == Pauli::Y) return {Pauli::X, 3};
    return {Pauli::Y, 3};  // X*Z
}

std::vector<cdouble> pauli_matrix(Pauli p) {
    const cdouble o(1, 0), z(0, 0), im(0, 1);
    switch (p) {
        case Pauli::I:
            return {o, z, z, o};
        case Pauli::X:
            return {z, o, o, z};
        case Pauli::Y:
            return {z, -im, im, z};
        case Pauli::Z:
            return {o, z, z, -o};
    }
    return {};
}

PauliOp PauliOp::times(const PauliOp &rhs) const {
    if (arity() != rhs.arity()) {
        throw std::invalid_argument("PauliOp arity mismatch");
    }
    std::vector<Pauli> labels(arity());
    int phase = phase_ + rhs.phase_;
    for (size_t i = 0; i < arity(); i++) {
        PauliProduct p = pauli_multiply(labels_[i], rhs.labels_[i]);
        labels[i] = p.op;
        phase += p.phase;
    }
    return PauliOp(std::move(labels), phase);
}

PauliOp PauliOp::transposed() const {
    int phase = phase_;
    for (Pauli p : labels_) {
        if (p == Pauli::Y) {
            phase += 2;
        }
    }
    return PauliOp(labels_, phase);
}

PauliOp PauliOp::adjoint() const {
    return PauliOp(labels_, -phase_);
}

bool PauliOp::is_identity() const {
    if (phase_ != 0) {
        return false;
    }
    for (Pauli p : labels_) {
        if (p != Pauli::I) {
            return false;
        }
    }
    return true;
}

bool PauliOp::is_identity_up_to_phase() const {
    for (Pauli p : labels_) {
        if (p != Pauli::I) {
            return false;
        }
    }
    return true;
}

bool PauliOp::same_up_to_phase(const PauliOp &other) const {
    return labels_ == other.labels_;
}

std::vector<cdouble> PauliOp::matrix() const {
    size_t dim = size_t{1} << arity();
    std::vector<cdouble> out(dim * dim, cdouble(0, 0));
    const cdouble phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (size_t r = 0; r < dim; r++) {
        for (size_t c = 0; c < dim; c++) {
            cdouble v = phases[phase_];
            for (size_t q = 0; q < arity(); q++) {
                size_t shift = arity() - 1 - q;
                size_t rb = (r >> shift) & 1, cb = (c >> shift) & 1;
                std::vector<cdouble> m = pauli_matrix(labels_[q]);
                v *= m[rb * 2 + cb];
                if (v == cdouble(0, 0)) {
                    break;
                }
            }
            out[r * dim + c] = v;
        }
    }
    return out;
}

std::string PauliOp::str() const {
    static const char *prefix[4] = {"", "i*", "-", "-i*"};
    std::string s = prefix[phase_];
    for (Pauli p : labels_) {
        s += pauli_char(p);
    }
    return s;
}

}  // namespace mqtm
