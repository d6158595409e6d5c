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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mqtm/machine.hpp"
#include "mqtm/protocols.hpp"

namespace mqtm {

/// The concrete machine families:
///   A: one infinite tape, two heads, the two-qubit universal observable set.
///   B: one infinite tape, one head, single-qubit observables (not universal).
///   C: one infinite tape, one head, {X, Z}, moves {-1, 0, +1} (classical).
///   D: two infinite tapes, one head each.
///   E: a two-qubit tape plus an infinite tape.
///   F: a one-qubit tape (immobile head) plus an infinite tape.
enum class ModelFamily { A, B, C, D, E, F };

ModelFamily model_family_from_name(const std::string &name);
std::string model_family_name(ModelFamily family);

struct MoveRule {
    bool any = true;
    std::set<int64_t> allowed;  // used when !any

    bool permits(int64_t d) const { return any || allowed.count(d) > 0; }
};

/// Family descriptor: tape layout, head count, observable table and move
/// set. check() reports every violation of family membership.
struct ModelDescriptor {
    ModelFamily family;
    std::vector<std::optional<int64_t>> tape_lengths;
    size_t head_count = 0;
    bool single_qubit_only = false;           // M_B: any 1-qubit observables
    std::set<std::string> observable_names;   // canonical forms
    std::vector<MoveRule> move_rules;

    std::vector<std::string> check(const MachineSpec &machine) const;
    bool allows_observable(const std::string &canonical_form) const;
};

ModelDescriptor make_model(ModelFamily family);

// ---------------------------------------------------------------------------
// Classical Turing machines and their embedding into M_C (reading is a
// Z-measurement; writing is the repeated X-then-Z loop).

struct TmRule {
    std::string state;
    int read;
    std::string next;
    int write;
    int move;  // -1, 0, +1
};

struct ClassicalTM {
    std::vector<std::string> states;
    std::string initial;
    std::set<std::string> halting;
    std::vector<TmRule> rules;

    const TmRule *find(const std::string &state, int bit) const;
    std::vector<std::string> validate() const;
};

/// Line format: `states:`, `initial:`, `halt:` headers plus rule rows
/// `s b -> s' b' d`.
ClassicalTM parse_classical_tm(const std::string &text);
std::string serialize_classical_tm(const ClassicalTM &tm);

struct TmRunResult {
    std::map<int64_t, int> tape;
    int64_t head = 0;
    std::string state;
    bool halted = false;
    size_t steps = 0;
};

/// Reference oracle: runs the TM classically.
TmRunResult run_classical_tm(const ClassicalTM &tm, std::map<int64_t, int> tape,
                             size_t max_steps);

/// Embeds the TM into M_C. The qubit tape plays the role of the bit tape;
/// runs on basis inputs halt almost surely with the tape encoding the TM's
/// output. State count is linear in the rule count.
MachineSpec compile_classical_tm(const ClassicalTM &tm);

// ---------------------------------------------------------------------------
// Machine fragments for the protocols, used by the equivalence tests
// between register-level subroutines and their automaton forms.

/// M_C fragment writing `bit` at the head cell, then halting.
MachineSpec write_bit_machine(int bit);
/// M_F fragment transferring the infinite-tape qubit at cell 0 to the
/// one-qubit tape.
MachineSpec state_transfer_machine();
/// M_D fragment running the six-measurement Bell preparation on upper
/// cells (0, 1) through lower cell 0.
MachineSpec bell_prep_machine();

// ---------------------------------------------------------------------------
// Measurement programs: tape-layout-independent traces of M_A computations,
// and their simulation under the D/E/F layouts.

struct ProgramOp {
    std::string observable;  // canonical O_A name
    size_t q1 = 0;
    size_t q2 = 0;
    std::string label;         // optional jump target for this row
    std::string branch_minus;  // optional label to jump to on outcome -1
};

struct MeasurementProgram {
    std::vector<ProgramOp> ops;

    size_t num_logical() const;
    int label_index(const std::string &label) const;  // -1 if missing
    std::vector<std::string> validate() const;        // O_A membership, ranges, labels
};

/// Rows `OBS i j`, optionally prefixed `NAME:` labels and suffixed
/// `-> NAME` branch-on-minus targets.
MeasurementProgram parse_program(const std::string &text);
std::string serialize_program(const MeasurementProgram &prog);

struct FlatRunResult {
    std::vector<double> outcomes;
    StateVector state;
};

/// Direct execution on a flat register of the program's logical qubits.
FlatRunResult run_program_flat(const MeasurementProgram &prog, const StateVector &logical_input,
                               const OutcomeChooser &chooser, size_t max_ops = 1000);

struct ReductionOptions {
    int max_rounds_per_move = 64;
    size_t max_ops = 1000;
};

struct ReductionResult {
    std::vector<double> program_outcomes;
    StateVector logical_state;  // reduced state at the logical home cells
    StateVector full_register;
    size_t measurement_count = 0;
    std::vector<int> move_rounds;  // rounds of each until-identity move
    std::set<std::string> machine_observables;  // family-oriented forms used
};

/// Executes the program under the family's tape layout: operands that
/// cannot be measured jointly are moved by teleportation (D, E) or state
/// transfer (F), with the correction loop repeated until the byproduct is
/// the identity, exactly as the universality proofs prescribe.
ReductionResult simulate_program_on(ModelFamily family, const MeasurementProgram &prog,
                                    const StateVector &logical_input,
                                    const OutcomeChooser &chooser, ReductionOptions opts = {});
ReductionResult simulate_program_on(ModelFamily family, const MeasurementProgram &prog,
                                    const StateVector &logical_input, RandomSource &rng,
                                    ReductionOptions opts = {});

struct ReductionEquivalenceReport {
    double tvd = 0.0;            // over (program outcome history, final state)
    double residual_mass = 0.0;  // loop mass beyond the iteration cutoff
    double min_fidelity = 1.0;   // matched-history state fidelity floor
    size_t flat_paths = 0;
    size_t reduced_nodes = 0;

    bool passed(double tol = 1e-9) const {
        return tvd + residual_mass <= tol && min_fidelity >= 1.0 - tol;
    }
};

/// Exhaustively enumerates both executions and compares the joint
/// distribution of program outcomes and final logical states. The reduced
/// side merges equivalent branches (junk qubits are verified disentangled,
/// then reset), which keeps the until-identity loops finite-state; the
/// un-enumerated loop tail is reported as residual_mass.
ReductionEquivalenceReport check_reduction_equivalence(ModelFamily family,
                                                       const MeasurementProgram &prog,
                                                       const StateVector &logical_input,
                                                       double tol = 1e-9);

}  // namespace mqtm
