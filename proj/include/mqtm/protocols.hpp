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

#include <span>
#include <string>
#include <vector>

#include "mqtm/measurement.hpp"
#include "mqtm/pauli.hpp"
#include "mqtm/rng.hpp"
#include "mqtm/state_vector.hpp"

namespace mqtm {

/// Tensor of single-qubit Paulis over tracked register qubits, with a
/// global power of i. Records the byproduct implied by measurement
/// outcomes; never applied at runtime, only composed and reported.
class PauliFrame {
   public:
    static PauliFrame identity() { return PauliFrame(); }

    Pauli at(size_t qubit) const;
    int phase_exponent() const { return phase_; }

    /// Composes `p` on qubit `qubit` from the left.
    void left_multiply(size_t qubit, Pauli p, int phase_exponent = 0);
    void left_multiply(const PauliFrame &other);

    /// Transpose: flips the sign contribution of every Y.
    PauliFrame transposed() const;

    bool is_identity_up_to_phase() const;
    const std::vector<std::pair<size_t, Pauli>> non_identity() const;

    /// Test-oracle helpers; frames are involutions up to phase, so the
    /// inverse has the same labels.
    StateVector apply_to(const StateVector &state) const;
    StateVector apply_inverse_to(const StateVector &state) const;

    std::string str() const;

   private:
    std::vector<std::pair<size_t, Pauli>> ops_;  // sorted by qubit, no I entries
    int phase_ = 0;
};

struct ProtocolResult {
    std::vector<MeasurementRecord> outcomes;
    PauliFrame frame;
    int rounds = 1;
};

/// A protocol expressed as data: the measurement sequence plus the closed
/// form for the byproduct frame. Protocol functions, machine fragments and
/// exhaustive enumerations all interpret the same script.
struct ProtocolScript {
    struct Meas {
        std::string observable;
        std::vector<size_t> qubits;
    };
    std::vector<Meas> measurements;
    /// Frame implied by the outcome list (one entry per measurement).
    PauliFrame (*frame_of)(const std::vector<size_t> &qubits, const std::vector<double> &outcomes);
    std::vector<size_t> qubits;  // role order used by frame_of
};

ProtocolScript transfer_script(size_t src, size_t dst);
ProtocolScript bell_measure_script(size_t p, size_t q);
ProtocolScript bell_prepare_cross_tape_script(size_t a, size_t b, size_t c);
/// Two-measurement Bell preparation for qubits that may be measured
/// jointly (cross-tape pairs).
ProtocolScript direct_bell_prepare_script(size_t p, size_t q);
ProtocolScript teleport_script(size_t src, size_t a, size_t b, size_t c);

/// Runs a script in place, collecting outcomes; returns the script frame.
ProtocolResult run_script(const ProtocolScript &script, StateVector &reg,
                          const OutcomeChooser &chooser);

/// Z-measurement read; returns (1 - outcome) / 2.
int classical_read(StateVector &reg, size_t cell, const OutcomeChooser &chooser,
                   std::vector<MeasurementRecord> *log = nullptr);
int classical_read(StateVector &reg, size_t cell, RandomSource &rng,
                   std::vector<MeasurementRecord> *log = nullptr);

/// Lemma-style write: X-measure then Z-measure, repeated until the Z
/// outcome encodes `bit`. Always runs at least one full round. Throws after
/// max_rounds failures.
ProtocolResult classical_write(StateVector &reg, size_t cell, int bit,
                               const OutcomeChooser &chooser, int max_rounds = 64);
ProtocolResult classical_write(StateVector &reg, size_t cell, int bit, RandomSource &rng,
                               int max_rounds = 64);

/// Z(dst), X⊗X(src,dst), Z(src). Moves src's state to dst up to the frame
/// X^{(1-o3)/2} Z^{(1-o2)/2} X^{(1-o1)/2}; src ends disentangled. dst must
/// be unentangled beforehand.
ProtocolResult state_transfer(StateVector &reg, size_t src, size_t dst,
                              const OutcomeChooser &chooser);
ProtocolResult state_transfer(StateVector &reg, size_t src, size_t dst, RandomSource &rng);

/// Re-transfers through the pool (cyclically) until the composed frame is
/// the identity up to phase. Succeeds with probability 1/4 per round.
ProtocolResult state_transfer_until_identity(StateVector &reg, size_t src,
                                             std::span<const size_t> dst_pool,
                                             const OutcomeChooser &chooser, int max_rounds = 64);
ProtocolResult state_transfer_until_identity(StateVector &reg, size_t src,
                                             std::span<const size_t> dst_pool, RandomSource &rng,
                                             int max_rounds = 64);

/// Z⊗Z then X⊗X; collapses (p, q) onto the Bell state identified by the
/// two outcomes. The frame F satisfies post = (F ⊗ I)(|00>+|11>)/√2.
ProtocolResult bell_measure(StateVector &reg, size_t p, size_t q, const OutcomeChooser &chooser);
ProtocolResult bell_measure(StateVector &reg, size_t p, size_t q, RandomSource &rng);

/// The six-measurement same-tape Bell preparation:
/// Z(a), Z(b), Z(c), X⊗X(c,a), X⊗X(c,b), Z(c). Leaves (a, b) in the
/// frame-corrected (|00>+|11>)/√2 and c in a basis state.
ProtocolResult bell_prepare_cross_tape(StateVector &reg, size_t a, size_t b, size_t c,
                                       const OutcomeChooser &chooser);
ProtocolResult bell_prepare_cross_tape(StateVector &reg, size_t a, size_t b, size_t c,
                                       RandomSource &rng);

/// Bell preparation on (a, b) through c, then a Bell measurement on
/// (src, b). Moves src's state to a up to the composed frame; the frame is
/// the identity with probability exactly 1/4.
ProtocolResult teleport(StateVector &reg, size_t src, size_t a, size_t b, size_t c,
                        const OutcomeChooser &chooser);
ProtocolResult teleport(StateVector &reg, size_t src, size_t a, size_t b, size_t c,
                        RandomSource &rng);

}  // namespace mqtm
