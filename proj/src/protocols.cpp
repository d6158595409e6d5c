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

#include "mqtm/protocols.hpp"

#include <algorithm>
#include <stdexcept>

namespace mqtm {

namespace {

// (1 - outcome) / 2 as an exponent bit.
int exp_bit(double outcome) {
    return outcome > 0 ? 0 : 1;
}

void require_unentangled(const StateVector &reg, size_t qubit, const char *what) {
    if (single_qubit_purity(reg, qubit) < 1.0 - 1e-9) {
        throw std::invalid_argument(std::string(what) + " qubit must be unentangled");
    }
}

}  // namespace

Pauli PauliFrame::at(size_t qubit) const {
    for (const auto &[q, p] : ops_) {
        if (q == qubit) {
            return p;
        }
    }
    return Pauli::I;
}

void PauliFrame::left_multiply(size_t qubit, Pauli p, int phase_exponent) {
    phase_ = (phase_ + phase_exponent) % 4;
    if (p == Pauli::I) {
        return;
    }
    for (auto it = ops_.begin(); it != ops_.end(); ++it) {
        if (it->first == qubit) {
            PauliProduct prod = pauli_multiply(p, it->second);
            phase_ = (phase_ + prod.phase) % 4;
            if (prod.op == Pauli::I) {
                ops_.erase(it);
            } else {
                it->second = prod.op;
            }
            return;
        }
        if (it->first > qubit) {
            ops_.insert(it, {qubit, p});
            return;
        }
    }
    ops_.push_back({qubit, p});
}

void PauliFrame::left_multiply(const PauliFrame &other) {
    phase_ = (phase_ + other.phase_) % 4;
    for (const auto &[q, p] : other.ops_) {
        left_multiply(q, p);
    }
}

PauliFrame PauliFrame::transposed() const {
    PauliFrame out = *this;
    for (const auto &[q, p] : ops_) {
        if (p == Pauli::Y) {
            out.phase_ = (out.phase_ + 2) % 4;
        }
    }
    return out;
}

bool PauliFrame::is_identity_up_to_phase() const {
    return ops_.empty();
}

const std::vector<std::pair<size_t, Pauli>> PauliFrame::non_identity() const {
    return ops_;
}

StateVector PauliFrame::apply_to(const StateVector &state) const {
    StateVector out = state;
    for (const auto &[q, p] : ops_) {
        out = apply_pauli(out, PauliOp({p}), {q});
    }
    if (phase_ != 0) {
        const cdouble phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        std::vector<cdouble> amps = out.amplitudes();
        for (auto &a : amps) {
            a *= phases[phase_];
        }
        out = StateVector::raw(out.num_qubits(), std::move(amps));
    }
    return out;
}

StateVector PauliFrame::apply_inverse_to(const StateVector &state) const {
    PauliFrame inv = *this;
    inv.phase_ = (4 - phase_) % 4;
    // Labels are involutions on distinct qubits; only the phase flips.
    return inv.apply_to(state);
}

std::string PauliFrame::str() const {
    static const char *prefix[4] = {"", "i*", "-", "-i*"};
    std::string s = prefix[phase_];
    if (ops_.empty()) {
        return s + "I";
    }
    for (const auto &[q, p] : ops_) {
        if (s.size() > strlen(prefix[phase_])) {
            s += ".";
        }
        s += pauli_char(p);
        s += "[" + std::to_string(q) + "]";
    }
    return s;
}

ProtocolResult run_script(const ProtocolScript &script, StateVector &reg,
                          const OutcomeChooser &chooser) {
    ProtocolResult result;
    std::vector<double> outcomes;
    for (const auto &m : script.measurements) {
        auto [record, post] = measure(reg, builtin_observable(m.observable), m.qubits, chooser);
        reg = std::move(post);
        outcomes.push_back(record.outcome);
        result.outcomes.push_back(std::move(record));
    }
    result.frame = script.frame_of(script.qubits, outcomes);
    return result;
}

ProtocolScript transfer_script(size_t src, size_t dst) {
    ProtocolScript s;
    s.qubits = {src, dst};
    s.measurements = {{"Z", {dst}}, {"XX", {src, dst}}, {"Z", {src}}};
    s.frame_of = [](const std::vector<size_t> &qs, const std::vector<double> &o) {
        PauliFrame f;
        size_t dst = qs[1];
        if (exp_bit(o[0])) f.left_multiply(dst, Pauli::X);
        if (exp_bit(o[1])) f.left_multiply(dst, Pauli::Z);
        if (exp_bit(o[2])) f.left_multiply(dst, Pauli::X);
        return f;
    };
    return s;
}

ProtocolScript bell_measure_script(size_t p, size_t q) {
    ProtocolScript s;
    s.qubits = {p, q};
    s.measurements = {{"ZZ", {p, q}}, {"XX", {p, q}}};
    s.frame_of = [](const std::vector<size_t> &qs, const std::vector<double> &o) {
        // post = (F ⊗ I)(|00>+|11>)/√2 with F on the first qubit.
        PauliFrame f;
        if (exp_bit(o[1])) f.left_multiply(qs[0], Pauli::Z);
        if (exp_bit(o[0])) f.left_multiply(qs[0], Pauli::X);
        return f;
    };
    return s;
}

ProtocolScript direct_bell_prepare_script(size_t p, size_t q) {
    // Measuring Z⊗Z then X⊗X projects any prior contents onto an exact
    // Bell state, so preparation and measurement share a script.
    return bell_measure_script(p, q);
}

ProtocolScript bell_prepare_cross_tape_script(size_t a, size_t b, size_t c) {
    ProtocolScript s;
    s.qubits = {a, b, c};
    s.measurements = {{"Z", {a}},      {"Z", {b}},      {"Z", {c}},
                      {"XX", {c, a}},  {"XX", {c, b}},  {"Z", {c}}};
    s.frame_of = [](const std::vector<size_t> &qs, const std::vector<double> &o) {
        size_t a = qs[0], b = qs[1];
        int i = exp_bit(o[0]), j = exp_bit(o[1]), k = exp_bit(o[2]);
        int l = exp_bit(o[3]), m = exp_bit(o[4]), n = exp_bit(o[5]);
        PauliFrame f;
        if (i) f.left_multiply(a, Pauli::X);
        if (l) f.left_multiply(a, Pauli::Z);
        if (k) f.left_multiply(a, Pauli::X);
        if (j) f.left_multiply(b, Pauli::X);
        if (m) f.left_multiply(b, Pauli::Z);
        if (n) f.left_multiply(b, Pauli::X);
        return f;
    };
    return s;
}

ProtocolScript teleport_script(size_t src, size_t a, size_t b, size_t c) {
    ProtocolScript prep = bell_prepare_cross_tape_script(a, b, c);
    ProtocolScript bm = bell_measure_script(src, b);
    ProtocolScript s;
    s.qubits = {src, a, b, c};
    s.measurements = prep.measurements;
    s.measurements.insert(s.measurements.end(), bm.measurements.begin(), bm.measurements.end());
    s.frame_of = [](const std::vector<size_t> &qs, const std::vector<double> &o) {
        size_t src = qs[0], a = qs[1], b = qs[2], c = qs[3];
        ProtocolScript prep = bell_prepare_cross_tape_script(a, b, c);
        ProtocolScript bm = bell_measure_script(src, b);
        std::vector<double> prep_o(o.begin(), o.begin() + 6);
        std::vector<double> bm_o(o.begin() + 6, o.end());
        PauliFrame pair_frame = prep.frame_of(prep.qubits, prep_o);
        PauliFrame meas_frame = bm.frame_of(bm.qubits, bm_o);
        // Pair = (P_a ⊗ P_b)|Φ+>. Projecting (src, b) onto (σ ⊗ I)|Φ+>
        // leaves a holding P_a · P_b^T · σ^T applied to src's state.
        PauliFrame f;
        {
            PauliOp acc = PauliOp::identity(1);
            acc = acc.times(PauliOp({pair_frame.at(a)}));
            acc = acc.times(PauliOp({pair_frame.at(b)}).transposed());
            acc = acc.times(PauliOp({meas_frame.at(src)}).transposed());
            f.left_multiply(a, acc.label(0), acc.phase_exponent());
        }
        return f;
    };
    return s;
}

int classical_read(StateVector &reg, size_t cell, const OutcomeChooser &chooser,
                   std::vector<MeasurementRecord> *log) {
    auto [record, post] = measure(reg, builtin_observable("Z"), {cell}, chooser);
    reg = std::move(post);
    int bit = exp_bit(record.outcome);
    if (log) {
        log->push_back(std::move(record));
    }
    return bit;
}

int classical_read(StateVector &reg, size_t cell, RandomSource &rng,
                   std::vector<MeasurementRecord> *log) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return classical_read(reg, cell, chooser, log);
}

ProtocolResult classical_write(StateVector &reg, size_t cell, int bit,
                               const OutcomeChooser &chooser, int max_rounds) {
    if (max_rounds < 1) {
        throw std::invalid_argument("max_rounds must be at least 1");
    }
    ProtocolResult result;
    result.rounds = 0;
    for (int round = 0; round < max_rounds; round++) {
        auto [xr, after_x] = measure(reg, builtin_observable("X"), {cell}, chooser);
        reg = std::move(after_x);
        result.outcomes.push_back(xr);
        auto [zr, after_z] = measure(reg, builtin_observable("Z"), {cell}, chooser);
        reg = std::move(after_z);
        double outcome = zr.outcome;
        result.outcomes.push_back(std::move(zr));
        result.rounds++;
        if (exp_bit(outcome) == bit) {
            return result;
        }
    }
    throw std::runtime_error("classical_write exceeded its round limit");
}

ProtocolResult classical_write(StateVector &reg, size_t cell, int bit, RandomSource &rng,
                               int max_rounds) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return classical_write(reg, cell, bit, chooser, max_rounds);
}

ProtocolResult state_transfer(StateVector &reg, size_t src, size_t dst,
                              const OutcomeChooser &chooser) {
    if (src == dst) {
        throw std::invalid_argument("source and destination must differ");
    }
    require_unentangled(reg, dst, "destination");
    return run_script(transfer_script(src, dst), reg, chooser);
}

ProtocolResult state_transfer(StateVector &reg, size_t src, size_t dst, RandomSource &rng) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return state_transfer(reg, src, dst, chooser);
}

ProtocolResult state_transfer_until_identity(StateVector &reg, size_t src,
                                             std::span<const size_t> dst_pool,
                                             const OutcomeChooser &chooser, int max_rounds) {
    if (dst_pool.empty()) {
        throw std::invalid_argument("destination pool is empty");
    }
    ProtocolResult total;
    total.rounds = 0;
    size_t at = src;
    PauliOp composed = PauliOp::identity(1);
    for (int round = 0; round < max_rounds; round++) {
        size_t dst = dst_pool[round % dst_pool.size()];
        if (dst == at) {
            throw std::invalid_argument("destination pool too small to bounce");
        }
        ProtocolResult hop = run_script(transfer_script(at, dst), reg, chooser);
        for (auto &rec : hop.outcomes) {
            total.outcomes.push_back(std::move(rec));
        }
        composed = PauliOp({hop.frame.at(dst)}, hop.frame.phase_exponent()).times(composed);
        at = dst;
        total.rounds++;
        if (composed.is_identity_up_to_phase()) {
            total.frame = PauliFrame::identity();
            total.frame.left_multiply(at, composed.label(0), composed.phase_exponent());
            return total;
        }
    }
    throw std::runtime_error("state transfer did not reach the identity frame in time");
}

ProtocolResult state_transfer_until_identity(StateVector &reg, size_t src,
                                             std::span<const size_t> dst_pool, RandomSource &rng,
                                             int max_rounds) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return state_transfer_until_identity(reg, src, dst_pool, chooser, max_rounds);
}

ProtocolResult bell_measure(StateVector &reg, size_t p, size_t q, const OutcomeChooser &chooser) {
    if (p == q) {
        throw std::invalid_argument("Bell measurement needs two distinct qubits");
    }
    return run_script(bell_measure_script(p, q), reg, chooser);
}

ProtocolResult bell_measure(StateVector &reg, size_t p, size_t q, RandomSource &rng) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return bell_measure(reg, p, q, chooser);
}

ProtocolResult bell_prepare_cross_tape(StateVector &reg, size_t a, size_t b, size_t c,
                                       const OutcomeChooser &chooser) {
    if (a == b || a == c || b == c) {
        throw std::invalid_argument("Bell preparation needs three distinct qubits");
    }
    return run_script(bell_prepare_cross_tape_script(a, b, c), reg, chooser);
}

ProtocolResult bell_prepare_cross_tape(StateVector &reg, size_t a, size_t b, size_t c,
                                       RandomSource &rng) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return bell_prepare_cross_tape(reg, a, b, c, chooser);
}

ProtocolResult teleport(StateVector &reg, size_t src, size_t a, size_t b, size_t c,
                        const OutcomeChooser &chooser) {
    if (src == a || src == b || src == c || a == b || a == c || b == c) {
        throw std::invalid_argument("teleport needs four distinct qubits");
    }
    require_unentangled(reg, a, "ancilla");
    require_unentangled(reg, b, "ancilla");
    require_unentangled(reg, c, "ancilla");
    return run_script(teleport_script(src, a, b, c), reg, chooser);
}

ProtocolResult teleport(StateVector &reg, size_t src, size_t a, size_t b, size_t c,
                        RandomSource &rng) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return teleport(reg, src, a, b, c, chooser);
}

}  // namespace mqtm
