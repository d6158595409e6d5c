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

#include <Eigen/Dense>
#include <vector>

#include "mqtm/observable.hpp"
#include "mqtm/pauli.hpp"
#include "mqtm/rng.hpp"
#include "mqtm/state_vector.hpp"

namespace mqtm {

/// Outcome branches with probability below this are treated as impossible;
/// keeps renormalization away from division by near-zero norms.
constexpr double kProbabilityFloor = 1e-12;

struct MeasurementRecord {
    std::string observable_name;
    std::vector<size_t> positions;
    double outcome;
    double probability;
};

struct OutcomeBranch {
    double eigenvalue;
    double probability;
    StateVector post_state;
};

/// Applies a 2^k x 2^k operator to the qubits at `positions` (tensored with
/// identity elsewhere). Factor i of the operator acts on positions[i].
void apply_matrix_at(StateVector &state, const Eigen::MatrixXcd &op,
                     const std::vector<size_t> &positions);

StateVector apply_pauli(const StateVector &state, const PauliOp &pauli,
                        const std::vector<size_t> &positions);

/// Exhaustive outcome list for measuring `obs` at `positions`. Entries are
/// ordered by descending eigenvalue; branches below kProbabilityFloor are
/// omitted. Probabilities sum to 1 within 1e-10.
std::vector<OutcomeBranch> outcome_distribution(const StateVector &state, const Observable &obs,
                                                const std::vector<size_t> &positions);

/// Projective measurement: picks outcome m with probability <phi|P_m|phi>
/// via the chooser and returns the renormalized post-measurement state.
std::pair<MeasurementRecord, StateVector> measure(const StateVector &state, const Observable &obs,
                                                  const std::vector<size_t> &positions,
                                                  const OutcomeChooser &chooser);

std::pair<MeasurementRecord, StateVector> measure(const StateVector &state, const Observable &obs,
                                                  const std::vector<size_t> &positions,
                                                  RandomSource &rng);

/// Trace of the squared reduced density matrix of one qubit. Equals 1 iff
/// the qubit is unentangled with the rest of the register.
double single_qubit_purity(const StateVector &state, size_t position);

/// Purity of the reduced state of a subset of qubits.
double subset_purity(const StateVector &state, const std::vector<size_t> &positions);

/// Reduced state of `positions`, which must be unentangled with the rest
/// (subset purity within `tol` of 1; throws std::runtime_error otherwise).
/// The result's phase is fixed by making its largest amplitude real positive.
StateVector extract_subregister(const StateVector &state, const std::vector<size_t> &positions,
                                double tol = 1e-9);

/// Rebuilds the register with every qubit in `positions` forced to |0>.
/// Requires those qubits to be unentangled with the remainder.
StateVector reset_qubits_to_zero(const StateVector &state, const std::vector<size_t> &positions,
                                 double tol = 1e-9);

/// |<a|b>|.
double fidelity_up_to_global_phase(const StateVector &a, const StateVector &b);

/// Independent Haar-random single-qubit pure state.
StateVector haar_random_qubit(RandomSource &rng);

}  // namespace mqtm
