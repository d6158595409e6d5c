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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqtm/measurement.hpp"
#include "mqtm/observable.hpp"
#include "mqtm/rng.hpp"
#include "mqtm/state_vector.hpp"

namespace mqtm {

/// A tape of qubits; length is empty for an infinite tape. Infinite tapes
/// are indexed by signed integers, finite tapes by 0..length-1.
struct TapeSpec {
    std::string id;
    std::optional<int64_t> length;

    bool infinite() const { return !length.has_value(); }
    bool in_bounds(int64_t cell) const {
        return infinite() || (cell >= 0 && cell < *length);
    }
};

struct HeadSpec {
    std::string id;
    std::string tape;
    int64_t initial_cell = 0;
};

/// A transition outcome token: either the machine's initial token or a
/// measured eigenvalue. Eigenvalues match within 1e-6.
class Outcome {
   public:
    static Outcome initial(std::string token) { return Outcome(true, 0.0, std::move(token)); }
    static Outcome eigenvalue(double v);

    bool is_initial() const { return initial_; }
    double value() const { return value_; }
    const std::string &token() const { return token_; }
    bool matches(const Outcome &other) const;

   private:
    Outcome(bool init, double v, std::string tok)
        : initial_(init), value_(v), token_(std::move(tok)) {}
    bool initial_;
    double value_;
    std::string token_;
};

/// Formats an eigenvalue as an outcome token: "+1", "-1", else shortest
/// decimal form.
std::string format_eigenvalue(double v);

struct Configuration {
    std::string state;
    Outcome last_outcome;
};

struct Transition {
    std::string next_state;
    std::string observable;  // key into MachineSpec::observables
    std::vector<int64_t> move;
};

struct DeltaEntry {
    std::string state;
    Outcome on;
    Transition to;
};

/// A Measurement-based Quantum Turing Machine: states S, named observable
/// table O (arity = head count), outcome alphabet V (eigenvalues of O plus
/// the initial token), move set D ⊂ Z^k, and a partial transition map
/// δ: S × V → S × O × D. Halting is an undefined δ entry.
struct MachineSpec {
    std::vector<TapeSpec> tapes;
    std::vector<HeadSpec> heads;  // order defines the observable factor order
    std::map<std::string, std::string> observables;  // name -> builtin form
    std::vector<std::string> states;
    std::string initial_state;
    std::string initial_token = "init";
    std::string input_head;
    std::string output_head;
    std::vector<DeltaEntry> delta;

    const Transition *find_transition(const std::string &state, const Outcome &outcome) const;
    const TapeSpec *find_tape(const std::string &id) const;
    int head_index(const std::string &id) const;  // -1 if missing

    /// Registers a state name if new.
    void ensure_state(const std::string &name);
    /// Registers the observable under its canonical name and returns it.
    std::string ensure_observable(const std::string &name);
    void add_delta(const std::string &state, const Outcome &on, const std::string &next,
                   const std::string &obs, std::vector<int64_t> move);
};

/// Lists every well-formedness violation; empty means valid.
std::vector<std::string> validate(const MachineSpec &machine);

enum class AncillaPolicyKind { Zero, HaarRandom };

/// How qubits that are touched for the first time are initialized. The
/// machine's input is the only part of the tape with a known state; other
/// qubits materialize lazily, unentangled with everything existing.
struct AncillaPolicy {
    AncillaPolicyKind kind = AncillaPolicyKind::Zero;
    uint64_t seed = 0;

    static AncillaPolicy zero() { return {AncillaPolicyKind::Zero, 0}; }
    static AncillaPolicy haar_random(uint64_t seed) {
        return {AncillaPolicyKind::HaarRandom, seed};
    }
};

struct CellRef {
    size_t tape_index;
    int64_t cell;
    auto operator<=>(const CellRef &) const = default;
};

struct StepRecord {
    Configuration pre_config;
    std::vector<int64_t> move;
    std::vector<CellRef> cells;
    MeasurementRecord measurement;
    Configuration post_config;
};

enum class RunStatus { Halted, StepLimit };

struct RunResult {
    RunStatus status;
    std::vector<StepRecord> trace;
};

/// Live execution state of one machine run. Single-owner; mutate through
/// step()/run() only.
class Runtime {
   public:
    Runtime(MachineSpec machine, StateVector input, int64_t input_offset, AncillaPolicy policy,
            size_t max_qubits = 14);

    const MachineSpec &machine() const { return machine_; }
    const Configuration &config() const { return config_; }
    const StateVector &register_state() const { return register_; }
    const std::vector<int64_t> &head_positions() const { return head_pos_; }
    const std::vector<StepRecord> &trace() const { return trace_; }
    size_t step_count() const { return step_count_; }
    bool halted() const { return halted_; }

    /// Register index of a materialized cell, if any.
    std::optional<size_t> qubit_of(const CellRef &cell) const;

    /// Applies one transition. Returns the step record, or nothing when no
    /// transition applies (the machine halts). Throws on head bound
    /// violations, head coincidence at measurement time, or register
    /// capacity overflow.
    std::optional<StepRecord> step(const OutcomeChooser &chooser);
    std::optional<StepRecord> step(RandomSource &rng);

    RunResult run(RandomSource &rng, size_t max_steps);
    RunResult run(const OutcomeChooser &chooser, size_t max_steps);

    /// Reduced state of `width` cells starting at the output head. Requires
    /// the run to have halted and the window to be materialized and
    /// unentangled with the remainder.
    StateVector output_window(size_t width) const;

    /// Classical readout of one cell (deterministic on basis states).
    int read_bit(const CellRef &cell, const OutcomeChooser &chooser);

   private:
    size_t materialize(const CellRef &cell);

    MachineSpec machine_;
    Configuration config_;
    std::vector<int64_t> head_pos_;
    StateVector register_;
    std::map<CellRef, size_t> cell_map_;
    AncillaPolicy policy_;
    RandomSource ancilla_rng_;
    size_t max_qubits_;
    size_t step_count_ = 0;
    bool halted_ = false;
    std::vector<StepRecord> trace_;
};

/// Places `input` on the input head's tape starting at `input_offset` and
/// points the input head at its first qubit.
Runtime new_run(const MachineSpec &machine, const StateVector &input, int64_t input_offset,
                AncillaPolicy policy, size_t max_qubits = 14);

}  // namespace mqtm
