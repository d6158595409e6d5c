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

#include "mqtm/machine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mqtm {

Outcome Outcome::eigenvalue(double v) {
    return Outcome(false, v, format_eigenvalue(v));
}

bool Outcome::matches(const Outcome &other) const {
    if (initial_ != other.initial_) {
        return false;
    }
    if (initial_) {
        return token_ == other.token_;
    }
    return std::abs(value_ - other.value_) <= 1e-6;
}

std::string format_eigenvalue(double v) {
    double r = std::round(v);
    if (std::abs(v - r) < 1e-9 && std::abs(r) < 1e15) {
        long long i = static_cast<long long>(r);
        std::string s = std::to_string(i);
        if (i >= 0) {
            s.insert(s.begin(), '+');
        }
        return s;
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const Transition *MachineSpec::find_transition(const std::string &state,
                                               const Outcome &outcome) const {
    for (const DeltaEntry &e : delta) {
        if (e.state == state && e.on.matches(outcome)) {
            return &e.to;
        }
    }
    return nullptr;
}

const TapeSpec *MachineSpec::find_tape(const std::string &id) const {
    for (const TapeSpec &t : tapes) {
        if (t.id == id) {
            return &t;
        }
    }
    return nullptr;
}

int MachineSpec::head_index(const std::string &id) const {
    for (size_t i = 0; i < heads.size(); i++) {
        if (heads[i].id == id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

void MachineSpec::ensure_state(const std::string &name) {
    if (std::find(states.begin(), states.end(), name) == states.end()) {
        states.push_back(name);
    }
}

std::string MachineSpec::ensure_observable(const std::string &name) {
    std::string canon = canonical_observable_name(name);
    observables.emplace(canon, canon);
    return canon;
}

void MachineSpec::add_delta(const std::string &state, const Outcome &on, const std::string &next,
                            const std::string &obs, std::vector<int64_t> move) {
    ensure_state(state);
    ensure_state(next);
    delta.push_back({state, on, {next, ensure_observable(obs), std::move(move)}});
}

std::vector<std::string> validate(const MachineSpec &m) {
    std::vector<std::string> report;
    auto complain = [&report](std::string msg) { report.push_back(std::move(msg)); };

    if (m.tapes.empty()) {
        complain("machine has no tapes");
    }
    std::set<std::string> tape_ids;
    for (const TapeSpec &t : m.tapes) {
        if (!tape_ids.insert(t.id).second) {
            complain("duplicate tape id: " + t.id);
        }
        if (t.length && *t.length < 1) {
            complain("tape " + t.id + " has non-positive length");
        }
    }
    if (m.heads.empty()) {
        complain("machine has no heads");
    }
    std::set<std::string> head_ids;
    for (const HeadSpec &h : m.heads) {
        if (!head_ids.insert(h.id).second) {
            complain("duplicate head id: " + h.id);
        }
        const TapeSpec *tape = m.find_tape(h.tape);
        if (!tape) {
            complain("head " + h.id + " references unknown tape " + h.tape);
        } else if (!tape->in_bounds(h.initial_cell)) {
            complain("head " + h.id + " starts outside its finite tape");
        }
    }
    size_t k = m.heads.size();

    // Collect the outcome alphabet V: eigenvalues of the observable table
    // plus the initial token.
    std::vector<Outcome> alphabet{Outcome::initial(m.initial_token)};
    for (const auto &[name, form] : m.observables) {
        try {
            const Observable &obs = builtin_observable(form);
            if (obs.arity() != k) {
                complain("observable " + name + " has arity " + std::to_string(obs.arity()) +
                         " but the machine has " + std::to_string(k) + " heads");
            }
            for (const auto &pair : obs.spectrum()) {
                alphabet.push_back(Outcome::eigenvalue(pair.eigenvalue));
            }
        } catch (const std::invalid_argument &) {
            complain("observable " + name + " has unknown form " + form);
        }
    }

    std::set<std::string> state_set(m.states.begin(), m.states.end());
    if (!state_set.count(m.initial_state)) {
        complain("initial state " + m.initial_state + " is not declared");
    }
    if (m.head_index(m.input_head) < 0) {
        complain("input head " + m.input_head + " is not declared");
    }
    if (m.head_index(m.output_head) < 0) {
        complain("output head " + m.output_head + " is not declared");
    }

    std::set<std::pair<std::string, std::string>> seen_keys;
    for (const DeltaEntry &e : m.delta) {
        if (!state_set.count(e.state)) {
            complain("delta entry from undeclared state " + e.state);
        }
        if (!state_set.count(e.to.next_state)) {
            complain("delta entry targets undeclared state " + e.to.next_state);
        }
        if (!m.observables.count(e.to.observable)) {
            complain("delta entry uses undeclared observable " + e.to.observable);
        }
        if (e.to.move.size() != k) {
            complain("delta entry move arity " + std::to_string(e.to.move.size()) +
                     " does not match head count");
        }
        bool known = std::any_of(alphabet.begin(), alphabet.end(),
                                 [&](const Outcome &o) { return o.matches(e.on); });
        if (!known) {
            complain("delta entry keyed on outcome " + e.on.token() +
                     " which no observable can produce");
        }
        if (!seen_keys.insert({e.state, e.on.token()}).second) {
            complain("duplicate delta entry for (" + e.state + ", " + e.on.token() + ")");
        }
    }
    return report;
}

Runtime::Runtime(MachineSpec machine, StateVector input, int64_t input_offset,
                 AncillaPolicy policy, size_t max_qubits)
    : machine_(std::move(machine)),
      config_{machine_.initial_state, Outcome::initial(machine_.initial_token)},
      register_(std::move(input)),
      policy_(policy),
      ancilla_rng_(policy.seed),
      max_qubits_(max_qubits) {
    int input_head = machine_.head_index(machine_.input_head);
    if (input_head < 0) {
        throw std::invalid_argument("machine has no input head");
    }
    const HeadSpec &ih = machine_.heads[input_head];
    const TapeSpec *tape = machine_.find_tape(ih.tape);
    size_t tape_index = 0;
    for (size_t i = 0; i < machine_.tapes.size(); i++) {
        if (machine_.tapes[i].id == ih.tape) {
            tape_index = i;
        }
    }
    if (register_.num_qubits() > max_qubits_) {
        throw std::runtime_error("input exceeds the register capacity");
    }
    for (size_t q = 0; q < register_.num_qubits(); q++) {
        int64_t cell = input_offset + static_cast<int64_t>(q);
        if (!tape->in_bounds(cell)) {
            throw std::runtime_error("input does not fit on the input tape");
        }
        cell_map_[{tape_index, cell}] = q;
    }
    for (const HeadSpec &h : machine_.heads) {
        head_pos_.push_back(h.initial_cell);
    }
    // The input head points at the first qubit of the input.
    head_pos_[input_head] = input_offset;
}

std::optional<size_t> Runtime::qubit_of(const CellRef &cell) const {
    auto it = cell_map_.find(cell);
    if (it == cell_map_.end()) {
        return std::nullopt;
    }
    return it->second;
}

size_t Runtime::materialize(const CellRef &cell) {
    auto it = cell_map_.find(cell);
    if (it != cell_map_.end()) {
        return it->second;
    }
    if (register_.num_qubits() + 1 > max_qubits_) {
        throw std::runtime_error("register capacity exceeded (max " +
                                 std::to_string(max_qubits_) + " qubits)");
    }
    StateVector fresh = policy_.kind == AncillaPolicyKind::Zero ? StateVector::zero_state(1)
                                                                : haar_random_qubit(ancilla_rng_);
    register_ = register_.tensor(fresh);
    size_t q = register_.num_qubits() - 1;
    cell_map_[cell] = q;
    return q;
}

std::optional<StepRecord> Runtime::step(const OutcomeChooser &chooser) {
    if (halted_) {
        throw std::runtime_error("machine already halted");
    }
    const Transition *t = machine_.find_transition(config_.state, config_.last_outcome);
    if (t == nullptr) {
        halted_ = true;
        return std::nullopt;
    }

    Configuration pre = config_;
    // Heads move first, then the observable is measured on the head cells.
    std::vector<CellRef> cells;
    for (size_t i = 0; i < machine_.heads.size(); i++) {
        int64_t target = head_pos_[i] + t->move[i];
        const TapeSpec *tape = machine_.find_tape(machine_.heads[i].tape);
        if (!tape->in_bounds(target)) {
            throw std::runtime_error("head " + machine_.heads[i].id +
                                     " moved outside its finite tape");
        }
        head_pos_[i] = target;
        size_t tape_index = 0;
        for (size_t j = 0; j < machine_.tapes.size(); j++) {
            if (machine_.tapes[j].id == machine_.heads[i].tape) {
                tape_index = j;
            }
        }
        cells.push_back({tape_index, target});
    }
    for (size_t i = 0; i < cells.size(); i++) {
        for (size_t j = i + 1; j < cells.size(); j++) {
            if (cells[i] == cells[j]) {
                throw std::runtime_error("two heads coincide at measurement time");
            }
        }
    }

    std::vector<size_t> positions;
    for (const CellRef &c : cells) {
        positions.push_back(materialize(c));
    }

    const Observable &obs = builtin_observable(machine_.observables.at(t->observable));
    auto [record, post] = measure(register_, obs, positions, chooser);
    record.observable_name = t->observable;
    register_ = std::move(post);

    config_ = {t->next_state, Outcome::eigenvalue(record.outcome)};
    StepRecord rec{pre, t->move, cells, record, config_};
    trace_.push_back(rec);
    step_count_++;
    return rec;
}

std::optional<StepRecord> Runtime::step(RandomSource &rng) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return step(chooser);
}

RunResult Runtime::run(const OutcomeChooser &chooser, size_t max_steps) {
    while (!halted_ && step_count_ < max_steps) {
        if (!step(chooser)) {
            break;
        }
    }
    return {halted_ ? RunStatus::Halted : RunStatus::StepLimit, trace_};
}

RunResult Runtime::run(RandomSource &rng, size_t max_steps) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return run(chooser, max_steps);
}

StateVector Runtime::output_window(size_t width) const {
    if (!halted_) {
        throw std::runtime_error("machine has not halted");
    }
    int head = machine_.head_index(machine_.output_head);
    size_t tape_index = 0;
    for (size_t j = 0; j < machine_.tapes.size(); j++) {
        if (machine_.tapes[j].id == machine_.heads[head].tape) {
            tape_index = j;
        }
    }
    std::vector<size_t> positions;
    for (size_t w = 0; w < width; w++) {
        CellRef cell{tape_index, head_pos_[head] + static_cast<int64_t>(w)};
        auto q = qubit_of(cell);
        if (!q) {
            throw std::runtime_error("output window covers an unmaterialized cell");
        }
        positions.push_back(*q);
    }
    return extract_subregister(register_, positions, 1e-9);
}

int Runtime::read_bit(const CellRef &cell, const OutcomeChooser &chooser) {
    size_t q = materialize(cell);
    auto [record, post] = measure(register_, builtin_observable("Z"), {q}, chooser);
    register_ = std::move(post);
    return record.outcome > 0 ? 0 : 1;
}

Runtime new_run(const MachineSpec &machine, const StateVector &input, int64_t input_offset,
                AncillaPolicy policy, size_t max_qubits) {
    return Runtime(machine, input, input_offset, policy, max_qubits);
}

}  // namespace mqtm
