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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "mqtm/enumerate.hpp"
#include "mqtm/machine_io.hpp"
#include "mqtm/models.hpp"

namespace mqtm {

namespace {

// Factor symbols of the O_A observables; 'W' stands for (X+Y)/√2.
std::pair<char, char> observable_factors(const std::string &canon) {
    if (canon == "XX+YX") {
        return {'W', 'X'};
    }
    if (canon == "XX+XY") {
        return {'X', 'W'};
    }
    if (canon.size() != 2) {
        throw std::invalid_argument("program observables must act on two qubits");
    }
    return {canon[0], canon[1]};
}

std::string name_from_factors(char a, char b) {
    if (a == 'W') {
        return "XX+YX";
    }
    if (b == 'W') {
        return "XX+XY";
    }
    return std::string{a, b};
}

const std::set<std::string> &oa_observables() {
    static const std::set<std::string> names = {"XX", "ZZ", "XZ", "ZX",
                                                "XI", "ZI", "XX+YX", "XX+XY"};
    return names;
}

// --- until-identity movement ------------------------------------------------

struct Hop {
    ProtocolScript script;
    size_t lands_at;
    std::vector<size_t> junk_after;
};

constexpr size_t kNoFixedExit = SIZE_MAX;

struct MoveTask {
    size_t start;
    size_t exit_at;  // kNoFixedExit: any location may exit
    std::function<Hop(size_t)> hop_from;
};

// Teleport hop with a directly preparable (cross-tape) Bell pair:
// prep ZZ,XX on (dst, partner), Bell measurement on (src, partner).
PauliFrame direct_hop_frame(const std::vector<size_t> &qs, const std::vector<double> &o) {
    size_t src = qs[0], dst = qs[1];
    ProtocolScript prep = direct_bell_prepare_script(qs[1], qs[2]);
    ProtocolScript bm = bell_measure_script(qs[0], qs[2]);
    PauliFrame pair = prep.frame_of(prep.qubits, {o[0], o[1]});
    PauliFrame meas = bm.frame_of(bm.qubits, {o[2], o[3]});
    PauliFrame f;
    PauliOp acc = PauliOp({pair.at(dst)}, pair.phase_exponent());
    acc = acc.times(PauliOp({meas.at(src)}).transposed());
    f.left_multiply(dst, acc.label(0), acc.phase_exponent());
    return f;
}

Hop direct_teleport_hop(size_t src, size_t dst, size_t partner) {
    ProtocolScript s;
    s.qubits = {src, dst, partner};
    s.measurements = {{"ZZ", {dst, partner}},
                      {"XX", {dst, partner}},
                      {"ZZ", {src, partner}},
                      {"XX", {src, partner}}};
    s.frame_of = direct_hop_frame;
    return Hop{std::move(s), dst, {src, partner}};
}

// Teleport hop whose pair shares a tape and is prepared through a helper
// on the other tape (the six-measurement preparation).
Hop six_teleport_hop(size_t src, size_t dst, size_t partner, size_t helper) {
    ProtocolScript s = teleport_script(src, dst, partner, helper);
    return Hop{std::move(s), dst, {src, partner, helper}};
}

Hop transfer_hop(size_t src, size_t dst) {
    ProtocolScript s = transfer_script(src, dst);
    return Hop{std::move(s), dst, {src}};
}

// --- per-family translation --------------------------------------------------

struct Translated {
    std::optional<MoveTask> fwd;
    char moved_factor = 0;
    // builds (observable name, qubit order) given the moved operand's
    // location; for unmoved ops the location argument is ignored.
    std::function<std::pair<std::string, std::vector<size_t>>(size_t)> measure_at;
    std::function<MoveTask(size_t)> back_from;  // defined when fwd is
};

struct FamilyContext {
    ModelFamily family;
    size_t logical_count;
    size_t aux_base;

    // D: tape 0 = upper (odd logical indices), tape 1 = lower.
    bool d_upper(size_t q) const {
        if (q < logical_count) {
            return q % 2 == 1;
        }
        return q < aux_base + 3;
    }
    size_t d_aux(bool upper, size_t role) const {
        return aux_base + (upper ? 0 : 3) + role;
    }

    // E/F: tape 0 is the finite tape.
    size_t e_fa() const { return aux_base; }
    size_t e_fb() const { return aux_base + 1; }
    size_t e_c() const { return aux_base + 2; }
    size_t e_y() const { return aux_base + 3; }
    size_t f_a() const { return aux_base; }
    size_t f_y() const { return aux_base + 1; }

    size_t aux_count() const {
        switch (family) {
            case ModelFamily::D:
                return 6;
            case ModelFamily::E:
                return 4;
            case ModelFamily::F:
                return 2;
            default:
                return 0;
        }
    }
};

Translated translate_d(const FamilyContext &ctx, char fa, char fb, size_t qi, size_t qj) {
    Translated t;
    auto oriented = [](char upper_factor, size_t upper_q, char lower_factor, size_t lower_q) {
        return std::make_pair(name_from_factors(upper_factor, lower_factor),
                              std::vector<size_t>{upper_q, lower_q});
    };
    if (fa == 'I' || fb == 'I') {
        char f = fa == 'I' ? fb : fa;
        size_t q = fa == 'I' ? qj : qi;
        bool up = ctx.d_upper(q);
        size_t park = ctx.d_aux(!up, 2);
        t.measure_at = [oriented, f, q, up, park](size_t) {
            return up ? oriented(f, q, 'I', park) : oriented('I', park, f, q);
        };
        return t;
    }
    if (ctx.d_upper(qi) != ctx.d_upper(qj)) {
        bool i_up = ctx.d_upper(qi);
        t.measure_at = [oriented, fa, fb, qi, qj, i_up](size_t) {
            return i_up ? oriented(fa, qi, fb, qj) : oriented(fb, qj, fa, qi);
        };
        return t;
    }
    // Same parity: the second operand commutes to the other tape.
    bool home_up = ctx.d_upper(qj);
    bool dest_up = !home_up;
    size_t w0 = ctx.d_aux(dest_up, 0), w1 = ctx.d_aux(dest_up, 1);
    size_t c = ctx.d_aux(home_up, 0), bp = ctx.d_aux(home_up, 1);
    MoveTask fwd;
    fwd.start = qj;
    fwd.exit_at = kNoFixedExit;
    fwd.hop_from = [qj, w0, w1, c, bp](size_t loc) {
        if (loc == qj) {
            return six_teleport_hop(qj, w0, w1, c);
        }
        if (loc == w0) {
            return direct_teleport_hop(w0, w1, bp);
        }
        return direct_teleport_hop(w1, w0, bp);
    };
    t.fwd = fwd;
    t.moved_factor = fb;
    bool i_up = ctx.d_upper(qi);
    t.measure_at = [oriented, fa, fb, qi, i_up](size_t loc) {
        return i_up ? oriented(fa, qi, fb, loc) : oriented(fb, loc, fa, qi);
    };
    t.back_from = [qj, w0, w1, c, bp](size_t from) {
        MoveTask back;
        back.start = from;
        back.exit_at = qj;
        back.hop_from = [qj, w0, w1, c, bp](size_t loc) {
            if (loc == qj) {
                return six_teleport_hop(qj, w0, w1, c);
            }
            // Pair (qj, bp) shares qj's tape; helper sits opposite.
            size_t helper = loc == w0 ? w1 : w0;
            return six_teleport_hop(loc, qj, bp, helper);
        };
        return back;
    };
    return t;
}

Translated translate_e(const FamilyContext &ctx, char fa, char fb, size_t qi, size_t qj) {
    Translated t;
    if (fa == 'I' || fb == 'I') {
        char f = fa == 'I' ? fb : fa;
        size_t q = fa == 'I' ? qj : qi;
        size_t park = ctx.e_fa();
        t.measure_at = [f, q, park](size_t) {
            return std::make_pair(name_from_factors('I', f), std::vector<size_t>{park, q});
        };
        return t;
    }
    size_t fa_q = ctx.e_fa(), fb_q = ctx.e_fb(), c = ctx.e_c(), y = ctx.e_y();
    MoveTask fwd;
    fwd.start = qi;
    fwd.exit_at = kNoFixedExit;
    fwd.hop_from = [qi, fa_q, fb_q, c, y](size_t loc) {
        if (loc == qi) {
            return six_teleport_hop(qi, fa_q, fb_q, c);
        }
        if (loc == fa_q) {
            return direct_teleport_hop(fa_q, fb_q, y);
        }
        return direct_teleport_hop(fb_q, fa_q, y);
    };
    t.fwd = fwd;
    t.moved_factor = fa;
    t.measure_at = [fa, fb, qj](size_t loc) {
        return std::make_pair(name_from_factors(fa, fb), std::vector<size_t>{loc, qj});
    };
    t.back_from = [qi, fa_q, fb_q, c, y](size_t from) {
        MoveTask back;
        back.start = from;
        back.exit_at = qi;
        back.hop_from = [qi, fa_q, fb_q, c, y](size_t loc) {
            if (loc == qi) {
                return six_teleport_hop(qi, fa_q, fb_q, c);
            }
            // From a finite cell back home: pair (qi, y) shares the
            // infinite tape, helper is the other finite cell.
            size_t other = loc == fa_q ? fb_q : fa_q;
            return six_teleport_hop(loc, qi, y, other);
        };
        return back;
    };
    return t;
}

Translated translate_f(const FamilyContext &ctx, char fa, char fb, size_t qi, size_t qj) {
    Translated t;
    size_t a = ctx.f_a(), y = ctx.f_y();
    if (fa == 'I' || fb == 'I') {
        char f = fa == 'I' ? fb : fa;
        size_t q = fa == 'I' ? qj : qi;
        t.measure_at = [f, q, a](size_t) {
            return std::make_pair(name_from_factors('I', f), std::vector<size_t>{a, q});
        };
        return t;
    }
    // The rotated factor W must stay on the infinite tape: O_F only
    // contains X⊗(X+Y)/√2 with X on the one-qubit tape.
    bool move_second = fa == 'W';
    size_t moved_home = move_second ? qj : qi;
    size_t fixed_home = move_second ? qi : qj;
    char moved_factor = move_second ? fb : fa;
    char fixed_factor = move_second ? fa : fb;

    MoveTask fwd;
    fwd.start = moved_home;
    fwd.exit_at = a;
    fwd.hop_from = [moved_home, a, y](size_t loc) {
        if (loc == moved_home) {
            return transfer_hop(moved_home, a);
        }
        if (loc == a) {
            return transfer_hop(a, y);
        }
        return transfer_hop(y, a);
    };
    t.fwd = fwd;
    t.moved_factor = moved_factor;
    t.measure_at = [moved_factor, fixed_factor, fixed_home](size_t loc) {
        return std::make_pair(name_from_factors(moved_factor, fixed_factor),
                              std::vector<size_t>{loc, fixed_home});
    };
    t.back_from = [moved_home, a](size_t from) {
        MoveTask back;
        back.start = from;
        back.exit_at = moved_home;
        back.hop_from = [moved_home, a](size_t loc) {
            return loc == a ? transfer_hop(a, moved_home) : transfer_hop(moved_home, a);
        };
        return back;
    };
    return t;
}

Translated translate_op(const FamilyContext &ctx, const ProgramOp &op) {
    auto [fa, fb] = observable_factors(op.observable);
    switch (ctx.family) {
        case ModelFamily::D:
            return translate_d(ctx, fa, fb, op.q1, op.q2);
        case ModelFamily::E:
            return translate_e(ctx, fa, fb, op.q1, op.q2);
        case ModelFamily::F:
            return translate_f(ctx, fa, fb, op.q1, op.q2);
        default:
            throw std::invalid_argument("programs run under families D, E and F only");
    }
}

StateVector embed_register(const FamilyContext &ctx, const StateVector &logical_input) {
    StateVector reg = logical_input;
    for (size_t k = 0; k < ctx.aux_count(); k++) {
        reg = reg.tensor(StateVector::zero_state(1));
    }
    return reg;
}

}  // namespace

// --- program type -------------------------------------------------------------

size_t MeasurementProgram::num_logical() const {
    size_t n = 0;
    for (const ProgramOp &op : ops) {
        n = std::max(n, std::max(op.q1, op.q2) + 1);
    }
    return n;
}

int MeasurementProgram::label_index(const std::string &label) const {
    for (size_t i = 0; i < ops.size(); i++) {
        if (ops[i].label == label) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::vector<std::string> MeasurementProgram::validate() const {
    std::vector<std::string> report;
    for (const ProgramOp &op : ops) {
        if (!oa_observables().count(op.observable)) {
            report.push_back("observable " + op.observable + " is not in the M_A set");
        }
        if (op.q1 == op.q2) {
            report.push_back("operands must be distinct");
        }
        if (!op.branch_minus.empty() && label_index(op.branch_minus) < 0) {
            report.push_back("branch target " + op.branch_minus + " is not defined");
        }
    }
    return report;
}

MeasurementProgram parse_program(const std::string &text) {
    MeasurementProgram prog;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (auto pos = line.find('#'); pos != std::string::npos) {
            line.resize(pos);
        }
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        for (std::string t; ls >> t;) {
            tokens.push_back(t);
        }
        if (tokens.empty()) {
            continue;
        }
        ProgramOp op;
        size_t k = 0;
        if (tokens[0].back() == ':') {
            op.label = tokens[0].substr(0, tokens[0].size() - 1);
            k = 1;
        }
        if (tokens.size() < k + 3) {
            throw parse_error(line_no, "expected 'OBS i j'");
        }
        try {
            op.observable = canonical_observable_name(tokens[k]);
        } catch (const std::invalid_argument &e) {
            throw parse_error(line_no, e.what());
        }
        op.q1 = std::stoul(tokens[k + 1]);
        op.q2 = std::stoul(tokens[k + 2]);
        if (tokens.size() == k + 5 && tokens[k + 3] == "->") {
            op.branch_minus = tokens[k + 4];
        } else if (tokens.size() != k + 3) {
            throw parse_error(line_no, "trailing tokens after 'OBS i j [-> LABEL]'");
        }
        prog.ops.push_back(std::move(op));
    }
    auto report = prog.validate();
    if (!report.empty()) {
        throw parse_error(line_no, report.front());
    }
    return prog;
}

std::string serialize_program(const MeasurementProgram &prog) {
    std::ostringstream out;
    for (const ProgramOp &op : prog.ops) {
        if (!op.label.empty()) {
            out << op.label << ": ";
        }
        out << op.observable << " " << op.q1 << " " << op.q2;
        if (!op.branch_minus.empty()) {
            out << " -> " << op.branch_minus;
        }
        out << "\n";
    }
    return out.str();
}

FlatRunResult run_program_flat(const MeasurementProgram &prog, const StateVector &logical_input,
                               const OutcomeChooser &chooser, size_t max_ops) {
    FlatRunResult result;
    result.state = logical_input;
    size_t pc = 0, executed = 0;
    while (pc < prog.ops.size()) {
        if (++executed > max_ops) {
            throw std::runtime_error("program exceeded its operation budget");
        }
        const ProgramOp &op = prog.ops[pc];
        auto [record, post] = measure(result.state, builtin_observable(op.observable),
                                      {op.q1, op.q2}, chooser);
        result.state = std::move(post);
        result.outcomes.push_back(record.outcome);
        if (record.outcome < 0 && !op.branch_minus.empty()) {
            pc = static_cast<size_t>(prog.label_index(op.branch_minus));
        } else {
            pc++;
        }
    }
    return result;
}

// --- runtime reduction ---------------------------------------------------------

namespace {

size_t run_move(StateVector &reg, const MoveTask &task, const OutcomeChooser &chooser,
                ReductionResult &result, int max_rounds) {
    size_t loc = task.start;
    PauliOp total = PauliOp::identity(1);
    for (int r = 0; r < max_rounds; r++) {
        Hop hop = task.hop_from(loc);
        ProtocolResult res = run_script(hop.script, reg, chooser);
        result.measurement_count += hop.script.measurements.size();
        total = PauliOp({res.frame.at(hop.lands_at)}, res.frame.phase_exponent()).times(total);
        loc = hop.lands_at;
        if (total.is_identity_up_to_phase() &&
            (task.exit_at == kNoFixedExit || loc == task.exit_at)) {
            result.move_rounds.push_back(r + 1);
            return loc;
        }
    }
    throw std::runtime_error("until-identity move exceeded its round limit");
}

}  // namespace

ReductionResult simulate_program_on(ModelFamily family, const MeasurementProgram &prog,
                                    const StateVector &logical_input,
                                    const OutcomeChooser &chooser, ReductionOptions opts) {
    auto report = prog.validate();
    if (!report.empty()) {
        throw std::invalid_argument("invalid program: " + report.front());
    }
    size_t L = std::max(prog.num_logical(), logical_input.num_qubits());
    if (logical_input.num_qubits() != L) {
        throw std::invalid_argument("logical input does not cover the program's qubits");
    }
    FamilyContext ctx{family, L, L};
    ModelDescriptor descriptor = make_model(family);

    ReductionResult result;
    result.full_register = embed_register(ctx, logical_input);

    size_t pc = 0, executed = 0;
    while (pc < prog.ops.size()) {
        if (++executed > opts.max_ops) {
            throw std::runtime_error("program exceeded its operation budget");
        }
        const ProgramOp &op = prog.ops[pc];
        Translated t = translate_op(ctx, op);
        size_t loc = 0;
        if (t.fwd) {
            loc = run_move(result.full_register, *t.fwd, chooser, result,
                           opts.max_rounds_per_move);
        }
        auto [obs_name, qubits] = t.measure_at(loc);
        if (!descriptor.allows_observable(obs_name)) {
            throw std::logic_error("translated observable " + obs_name +
                                   " is outside the family set");
        }
        result.machine_observables.insert(obs_name);
        auto [record, post] =
            measure(result.full_register, builtin_observable(obs_name), qubits, chooser);
        result.full_register = std::move(post);
        result.measurement_count++;
        result.program_outcomes.push_back(record.outcome);
        if (t.fwd) {
            run_move(result.full_register, t.back_from(loc), chooser, result,
                     opts.max_rounds_per_move);
        }
        if (record.outcome < 0 && !op.branch_minus.empty()) {
            pc = static_cast<size_t>(prog.label_index(op.branch_minus));
        } else {
            pc++;
        }
    }
    std::vector<size_t> home(L);
    for (size_t q = 0; q < L; q++) {
        home[q] = q;
    }
    result.logical_state = extract_subregister(result.full_register, home, 1e-7);
    return result;
}

ReductionResult simulate_program_on(ModelFamily family, const MeasurementProgram &prog,
                                    const StateVector &logical_input, RandomSource &rng,
                                    ReductionOptions opts) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return simulate_program_on(family, prog, logical_input, chooser, opts);
}

// --- exhaustive equivalence ------------------------------------------------------

namespace {

// Global phase carries no information; canonicalizing it lets branches
// that differ only by a phase merge.
StateVector canonical_phase(const StateVector &s) {
    size_t m = 0;
    for (size_t i = 1; i < s.dim(); i++) {
        if (std::norm(s.amplitude(i)) > std::norm(s.amplitude(m))) {
            m = i;
        }
    }
    cdouble pivot = s.amplitude(m);
    if (std::abs(pivot) < 1e-12) {
        return s;
    }
    cdouble phase = std::conj(pivot) / std::abs(pivot);
    std::vector<cdouble> amps = s.amplitudes();
    for (auto &a : amps) {
        a *= phase;
    }
    return StateVector::raw(s.num_qubits(), std::move(amps));
}

std::string quantize_state(const StateVector &s) {
    std::string key;
    key.reserve(s.dim() * 16);
    for (size_t i = 0; i < s.dim(); i++) {
        auto push = [&key](double v) {
            auto g = static_cast<int64_t>(std::llround(v * 1e8));
            key.append(reinterpret_cast<const char *>(&g), sizeof(g));
        };
        push(s.amplitude(i).real());
        push(s.amplitude(i).imag());
    }
    return key;
}

// Runs one protocol script on a register, returning the branch list.
std::vector<EnumeratedPath> expand_script(const ProtocolScript &script, const StateVector &reg) {
    return enumerate_paths(reg, [&script](StateVector &r, const OutcomeChooser &chooser) {
        run_script(script, r, chooser);
    });
}

Pauli class_mult(Pauli a, Pauli b) {
    return pauli_multiply(a, b).op;
}

}  // namespace

ReductionEquivalenceReport check_reduction_equivalence(ModelFamily family,
                                                       const MeasurementProgram &prog,
                                                       const StateVector &logical_input,
                                                       double tol) {
    ReductionEquivalenceReport report;
    size_t L = logical_input.num_qubits();

    // Flat side: full path enumeration, aggregated by outcome history.
    struct HistoryEntry {
        double prob = 0;
        StateVector state;
        bool set = false;
    };
    std::map<std::string, HistoryEntry> flat;
    {
        auto paths = enumerate_paths(logical_input,
                                     [&prog](StateVector &r, const OutcomeChooser &chooser) {
                                         FlatRunResult res = run_program_flat(prog, r, chooser);
                                         r = res.state;
                                     });
        report.flat_paths = paths.size();
        for (const auto &p : paths) {
            std::string h;
            for (double o : p.outcomes) {
                h += o > 0 ? '+' : '-';
            }
            auto &e = flat[h];
            e.prob += p.probability;
            if (!e.set) {
                e.state = p.state;
                e.set = true;
            }
        }
    }

    // Reduced side: ensemble with merging. Node key = (pc, history,
    // quantized register); junk is verified disentangled and reset after
    // every script so loop branches re-converge.
    FamilyContext ctx{family, L, L};
    ModelDescriptor descriptor = make_model(family);

    struct RNode {
        size_t pc;
        std::string history;
        StateVector reg;
        double prob;
    };
    auto rkey = [](size_t pc, const std::string &history, const StateVector &reg) {
        return std::to_string(pc) + "|" + history + "|" + quantize_state(reg);
    };

    std::map<std::string, RNode> frontier;
    {
        StateVector reg = embed_register(ctx, logical_input);
        frontier.emplace(rkey(0, "", reg), RNode{0, "", reg, 1.0});
    }
    std::map<std::string, HistoryEntry> reduced;
    double residual = 0.0;

    auto junk_reset = [&](const StateVector &reg, const std::vector<size_t> &junk) {
        return canonical_phase(reset_qubits_to_zero(reg, junk, 1e-6));
    };

    // Ensemble until-identity move for one input register. Merges branches
    // after every hop (byproduct classes ignore phase; registers are
    // phase-canonical and junk-reset). Once the continuing node set becomes
    // self-similar under a period of 1 or 2 hops — the same keys scaled by
    // a uniform ratio ρ — the remaining exit stream is the last period's
    // exits times ρ/(1-ρ), summed in closed form.
    auto ensemble_move = [&](const MoveTask &task, double prob0, const StateVector &reg0,
                             auto &&emit_exit) {
        struct LoopNode {
            double prob;
            StateVector reg;
            size_t loc;
            Pauli total;
        };
        struct ExitPattern {
            size_t loc;
            StateVector reg;
            double prob;
        };
        using ExitMap = std::map<std::string, ExitPattern>;
        std::map<std::string, LoopNode> work;
        work.emplace("start", LoopNode{prob0, reg0, task.start, Pauli::I});

        const int hop_cap = 600;
        std::vector<std::map<std::string, double>> mass_history;
        std::vector<ExitMap> exit_history;
        for (int hop = 0; hop < hop_cap && !work.empty(); hop++) {
            std::map<std::string, LoopNode> next;
            ExitMap exits;
            double remaining = 0;
            for (auto &[key, node] : work) {
                Hop h = task.hop_from(node.loc);
                auto branches = expand_script(h.script, node.reg);
                for (auto &b : branches) {
                    PauliFrame f = h.script.frame_of(h.script.qubits, b.outcomes);
                    Pauli total = class_mult(f.at(h.lands_at), node.total);
                    double prob = node.prob * b.probability;
                    if (prob < 1e-16) {
                        continue;
                    }
                    StateVector reg = junk_reset(b.state, h.junk_after);
                    bool done = total == Pauli::I &&
                                (task.exit_at == kNoFixedExit || h.lands_at == task.exit_at);
                    std::string nk = std::to_string(h.lands_at) + "|" +
                                     std::string(1, pauli_char(total)) + "|" + quantize_state(reg);
                    if (done) {
                        auto it = exits.find(nk);
                        if (it == exits.end()) {
                            exits.emplace(nk, ExitPattern{h.lands_at, std::move(reg), prob});
                        } else {
                            it->second.prob += prob;
                        }
                    } else {
                        auto it = next.find(nk);
                        if (it == next.end()) {
                            next.emplace(nk, LoopNode{prob, std::move(reg), h.lands_at, total});
                        } else {
                            it->second.prob += prob;
                        }
                        remaining += prob;
                    }
                }
            }
            for (const auto &[k, e] : exits) {
                emit_exit(e.loc, e.reg, e.prob);
            }

            std::map<std::string, double> mass;
            for (const auto &[k, n] : next) {
                mass[k] = n.prob;
            }
            double closed_ratio = -1;
            size_t closed_period = 0;
            for (size_t period = 1; period <= 2 && period <= mass_history.size(); period++) {
                const auto &ref = mass_history[mass_history.size() - period];
                if (mass.size() != ref.size() || mass.empty()) {
                    continue;
                }
                double ratio = -1;
                bool uniform = true;
                for (const auto &[k, p] : mass) {
                    auto it = ref.find(k);
                    if (it == ref.end() || it->second <= 0) {
                        uniform = false;
                        break;
                    }
                    double r = p / it->second;
                    if (ratio < 0) {
                        ratio = r;
                    } else if (std::abs(r - ratio) > 1e-9 * std::max(ratio, r)) {
                        uniform = false;
                        break;
                    }
                }
                if (uniform && ratio > 0 && ratio < 1) {
                    closed_ratio = ratio;
                    closed_period = period;
                    break;
                }
            }
            exit_history.push_back(std::move(exits));
            mass_history.push_back(std::move(mass));
            if (closed_period > 0) {
                // Future exits repeat the last `period` hops' exits scaled
                // by ρ, ρ², ...
                double tail = closed_ratio / (1 - closed_ratio);
                for (size_t back = 0; back < closed_period; back++) {
                    for (const auto &[k, e] : exit_history[exit_history.size() - 1 - back]) {
                        emit_exit(e.loc, e.reg, e.prob * tail);
                    }
                }
                work.clear();
                return;
            }
            work = std::move(next);
            if (remaining < 1e-13) {
                break;
            }
        }
        for (const auto &[k, n] : work) {
            residual += n.prob;
        }
    };

    size_t guard = 0;
    while (!frontier.empty()) {
        if (++guard > 100000) {
            throw std::runtime_error("reduction enumeration did not converge");
        }
        // Pop the node set sharing the smallest pc to keep memory flat.
        size_t pc = SIZE_MAX;
        for (const auto &[k, n] : frontier) {
            pc = std::min(pc, n.pc);
        }
        std::map<std::string, RNode> current;
        for (auto it = frontier.begin(); it != frontier.end();) {
            if (it->second.pc == pc) {
                current.emplace(it->first, std::move(it->second));
                it = frontier.erase(it);
            } else {
                ++it;
            }
        }
        if (pc >= prog.ops.size()) {
            std::vector<size_t> home(L);
            for (size_t q = 0; q < L; q++) {
                home[q] = q;
            }
            for (auto &[k, n] : current) {
                auto &e = reduced[n.history];
                e.prob += n.prob;
                if (!e.set) {
                    e.state = extract_subregister(n.reg, home, 1e-6);
                    e.set = true;
                }
            }
            continue;
        }

        const ProgramOp &op = prog.ops[pc];
        Translated t = translate_op(ctx, op);

        // Stage 1: forward moves (if any), yielding per-location node sets.
        struct MidNode {
            double prob;
            StateVector reg;
            std::string history;
        };
        std::map<size_t, std::map<std::string, MidNode>> at_location;
        auto collect = [&at_location](size_t loc, const std::string &history,
                                      const StateVector &reg, double prob) {
            auto &bucket = at_location[loc];
            std::string key = history + "|" + quantize_state(reg);
            auto it = bucket.find(key);
            if (it == bucket.end()) {
                bucket.emplace(key, MidNode{prob, reg, history});
            } else {
                it->second.prob += prob;
            }
        };
        for (auto &[k, n] : current) {
            if (t.fwd) {
                const std::string &history = n.history;
                ensemble_move(*t.fwd, n.prob, n.reg,
                              [&collect, &history](size_t loc, const StateVector &reg,
                                                   double prob) {
                                  collect(loc, history, reg, prob);
                              });
            } else {
                collect(0, n.history, n.reg, n.prob);
            }
        }

        // Stage 2: the program measurement, then the way back.
        for (auto &[loc, bucket] : at_location) {
            auto [obs_name, qubits] = t.measure_at(loc);
            if (!descriptor.allows_observable(obs_name)) {
                throw std::logic_error("translated observable " + obs_name +
                                       " is outside the family set");
            }
            for (auto &[key, node] : bucket) {
                auto branches =
                    outcome_distribution(node.reg, builtin_observable(obs_name), qubits);
                for (auto &b : branches) {
                    std::string h2 = node.history + (b.eigenvalue > 0 ? "+" : "-");
                    double prob = node.prob * b.probability;
                    size_t npc = (b.eigenvalue < 0 && !op.branch_minus.empty())
                                     ? static_cast<size_t>(prog.label_index(op.branch_minus))
                                     : pc + 1;
                    auto emit_frontier = [&](const StateVector &raw, double pr) {
                        StateVector reg = canonical_phase(raw);
                        std::string fk = rkey(npc, h2, reg);
                        auto it = frontier.find(fk);
                        if (it == frontier.end()) {
                            frontier.emplace(fk, RNode{npc, h2, std::move(reg), pr});
                        } else {
                            it->second.prob += pr;
                        }
                    };
                    if (t.fwd) {
                        ensemble_move(t.back_from(loc), prob, b.post_state,
                                      [&](size_t, const StateVector &reg, double pr) {
                                          emit_frontier(reg, pr);
                                      });
                    } else {
                        emit_frontier(b.post_state, prob);
                    }
                }
            }
        }
    }

    // Compare.
    double tvd = 0;
    for (const auto &[h, fe] : flat) {
        auto it = reduced.find(h);
        double rp = it == reduced.end() ? 0.0 : it->second.prob;
        tvd += std::abs(fe.prob - rp);
        if (it != reduced.end() && it->second.set && fe.set) {
            report.min_fidelity = std::min(report.min_fidelity,
                                           fidelity_up_to_global_phase(fe.state, it->second.state));
        }
    }
    for (const auto &[h, re] : reduced) {
        if (!flat.count(h)) {
            tvd += re.prob;
        }
    }
    report.tvd = tvd / 2;
    report.residual_mass = residual;
    report.reduced_nodes = reduced.size();
    return report;
}

}  // namespace mqtm
