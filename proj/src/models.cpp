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
#include <sstream>
#include <stdexcept>

#include "mqtm/machine_io.hpp"
#include "mqtm/models.hpp"

namespace mqtm {

ModelFamily model_family_from_name(const std::string &name) {
    if (name.size() == 1) {
        switch (name[0]) {
            case 'A':
            case 'a':
                return ModelFamily::A;
            case 'B':
            case 'b':
                return ModelFamily::B;
            case 'C':
            case 'c':
                return ModelFamily::C;
            case 'D':
            case 'd':
                return ModelFamily::D;
            case 'E':
            case 'e':
                return ModelFamily::E;
            case 'F':
            case 'f':
                return ModelFamily::F;
        }
    }
    throw std::invalid_argument("unknown model family: " + name);
}

std::string model_family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::A:
            return "A";
        case ModelFamily::B:
            return "B";
        case ModelFamily::C:
            return "C";
        case ModelFamily::D:
            return "D";
        case ModelFamily::E:
            return "E";
        case ModelFamily::F:
            return "F";
    }
    return "?";
}

ModelDescriptor make_model(ModelFamily family) {
    ModelDescriptor d;
    d.family = family;
    const std::set<std::string> base_a = {"XX", "ZZ", "XZ", "ZX", "XI", "ZI", "XX+YX", "XX+XY"};
    std::set<std::string> two_tape = base_a;
    two_tape.insert("IX");
    two_tape.insert("IZ");
    switch (family) {
        case ModelFamily::A:
            d.tape_lengths = {std::nullopt};
            d.head_count = 2;
            d.observable_names = base_a;
            d.move_rules = {MoveRule{}, MoveRule{}};
            break;
        case ModelFamily::B:
            d.tape_lengths = {std::nullopt};
            d.head_count = 1;
            d.single_qubit_only = true;
            d.move_rules = {MoveRule{}};
            break;
        case ModelFamily::C:
            d.tape_lengths = {std::nullopt};
            d.head_count = 1;
            d.observable_names = {"X", "Z"};
            d.move_rules = {MoveRule{false, {-1, 0, 1}}};
            break;
        case ModelFamily::D:
            d.tape_lengths = {std::nullopt, std::nullopt};
            d.head_count = 2;
            d.observable_names = two_tape;
            d.move_rules = {MoveRule{}, MoveRule{}};
            break;
        case ModelFamily::E:
            d.tape_lengths = {2, std::nullopt};
            d.head_count = 2;
            d.observable_names = two_tape;
            d.move_rules = {MoveRule{false, {-1, 0, 1}}, MoveRule{}};
            break;
        case ModelFamily::F:
            // The listing duplicates X⊗Z; it is read as covering both
            // orientations (X⊗Z and Z⊗X). The W⊗X form is absent: the
            // rotated observable exists only as X⊗(X+Y)/√2.
            d.tape_lengths = {1, std::nullopt};
            d.head_count = 2;
            d.observable_names = {"XX", "ZZ", "XZ", "ZX", "XI", "ZI", "IX", "IZ", "XX+XY"};
            d.move_rules = {MoveRule{false, {0}}, MoveRule{}};
            break;
    }
    return d;
}

bool ModelDescriptor::allows_observable(const std::string &canonical_form) const {
    if (single_qubit_only) {
        return canonical_form.size() == 1;
    }
    return observable_names.count(canonical_form) > 0;
}

std::vector<std::string> ModelDescriptor::check(const MachineSpec &m) const {
    std::vector<std::string> report = validate(m);
    if (m.tapes.size() != tape_lengths.size()) {
        report.push_back("family " + std::string(1, "ABCDEF"[int(family)]) + " expects " +
                         std::to_string(tape_lengths.size()) + " tapes");
        return report;
    }
    for (size_t i = 0; i < tape_lengths.size(); i++) {
        if (m.tapes[i].length != tape_lengths[i]) {
            report.push_back("tape " + m.tapes[i].id + " has the wrong kind or length");
        }
    }
    if (m.heads.size() != head_count) {
        report.push_back("family expects " + std::to_string(head_count) + " heads");
        return report;
    }
    if (tape_lengths.size() == 2) {
        // One head per tape, in tape order.
        for (size_t i = 0; i < 2; i++) {
            if (m.heads[i].tape != m.tapes[i].id) {
                report.push_back("head " + m.heads[i].id + " must sit on tape " + m.tapes[i].id);
            }
        }
    }
    for (const auto &[name, form] : m.observables) {
        if (!allows_observable(form)) {
            report.push_back("observable " + name + " (" + form + ") is outside the family set");
        }
    }
    for (const DeltaEntry &e : m.delta) {
        for (size_t i = 0; i < e.to.move.size() && i < move_rules.size(); i++) {
            if (!move_rules[i].permits(e.to.move[i])) {
                report.push_back("move component " + std::to_string(e.to.move[i]) +
                                 " of a delta entry is outside the family move set");
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

const TmRule *ClassicalTM::find(const std::string &state, int bit) const {
    for (const TmRule &r : rules) {
        if (r.state == state && r.read == bit) {
            return &r;
        }
    }
    return nullptr;
}

std::vector<std::string> ClassicalTM::validate() const {
    std::vector<std::string> report;
    std::set<std::string> declared(states.begin(), states.end());
    if (!declared.count(initial)) {
        report.push_back("initial state " + initial + " is not declared");
    }
    for (const std::string &h : halting) {
        if (!declared.count(h)) {
            report.push_back("halting state " + h + " is not declared");
        }
    }
    std::set<std::pair<std::string, int>> keys;
    for (const TmRule &r : rules) {
        if (!declared.count(r.state) || !declared.count(r.next)) {
            report.push_back("rule uses undeclared state " + r.state + " or " + r.next);
        }
        if (halting.count(r.state)) {
            report.push_back("rule departs from halting state " + r.state);
        }
        if (r.read != 0 && r.read != 1) {
            report.push_back("rule reads a non-bit");
        }
        if (r.write != 0 && r.write != 1) {
            report.push_back("rule writes a non-bit");
        }
        if (r.move < -1 || r.move > 1) {
            report.push_back("rule moves by more than one cell");
        }
        if (!keys.insert({r.state, r.read}).second) {
            report.push_back("duplicate rule for (" + r.state + ", " + std::to_string(r.read) +
                             ")");
        }
    }
    return report;
}

ClassicalTM parse_classical_tm(const std::string &text) {
    ClassicalTM tm;
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
        if (tokens[0] == "states:") {
            tm.states.assign(tokens.begin() + 1, tokens.end());
        } else if (tokens[0] == "initial:") {
            if (tokens.size() != 2) {
                throw parse_error(line_no, "expected 'initial: STATE'");
            }
            tm.initial = tokens[1];
        } else if (tokens[0] == "halt:") {
            tm.halting.insert(tokens.begin() + 1, tokens.end());
        } else {
            if (tokens.size() != 6 || tokens[2] != "->") {
                throw parse_error(line_no, "expected 's b -> s2 b2 d'");
            }
            TmRule r;
            r.state = tokens[0];
            r.read = tokens[1] == "1";
            if (tokens[1] != "0" && tokens[1] != "1") {
                throw parse_error(line_no, "read symbol must be 0 or 1");
            }
            r.next = tokens[3];
            if (tokens[4] != "0" && tokens[4] != "1") {
                throw parse_error(line_no, "write symbol must be 0 or 1");
            }
            r.write = tokens[4] == "1";
            if (tokens[5] == "-1") {
                r.move = -1;
            } else if (tokens[5] == "0") {
                r.move = 0;
            } else if (tokens[5] == "+1" || tokens[5] == "1") {
                r.move = 1;
            } else {
                throw parse_error(line_no, "move must be -1, 0 or +1");
            }
            tm.rules.push_back(std::move(r));
        }
    }
    auto report = tm.validate();
    if (!report.empty()) {
        throw parse_error(line_no, report.front());
    }
    return tm;
}

std::string serialize_classical_tm(const ClassicalTM &tm) {
    std::ostringstream out;
    out << "states:";
    for (const auto &s : tm.states) {
        out << " " << s;
    }
    out << "\ninitial: " << tm.initial << "\nhalt:";
    for (const auto &s : tm.halting) {
        out << " " << s;
    }
    out << "\n";
    for (const TmRule &r : tm.rules) {
        out << r.state << " " << r.read << " -> " << r.next << " " << r.write << " "
            << (r.move > 0 ? "+1" : r.move < 0 ? "-1" : "0") << "\n";
    }
    return out.str();
}

TmRunResult run_classical_tm(const ClassicalTM &tm, std::map<int64_t, int> tape,
                             size_t max_steps) {
    TmRunResult result;
    result.tape = std::move(tape);
    result.state = tm.initial;
    auto read = [&result](int64_t cell) {
        auto it = result.tape.find(cell);
        return it == result.tape.end() ? 0 : it->second;
    };
    while (result.steps < max_steps) {
        if (tm.halting.count(result.state)) {
            result.halted = true;
            return result;
        }
        const TmRule *r = tm.find(result.state, read(result.head));
        if (!r) {
            result.halted = true;
            return result;
        }
        result.tape[result.head] = r->write;
        result.head += r->move;
        result.state = r->next;
        result.steps++;
    }
    return result;
}

MachineSpec compile_classical_tm(const ClassicalTM &tm) {
    auto report = tm.validate();
    if (!report.empty()) {
        throw std::invalid_argument("invalid TM: " + report.front());
    }
    MachineSpec m;
    m.tapes.push_back({"t0", std::nullopt});
    m.heads.push_back({"h0", "t0", 0});
    m.initial_state = "start";
    m.initial_token = "init";
    m.input_head = m.output_head = "h0";
    m.ensure_state("start");
    m.ensure_observable("X");
    m.ensure_observable("Z");

    auto read_state = [](const std::string &s) { return "r[" + s + "]"; };
    auto outcome_for_bit = [](int bit) { return Outcome::eigenvalue(bit == 0 ? +1.0 : -1.0); };

    // Reading for the initial TM state happens at the input cell itself.
    m.add_delta("start", Outcome::initial("init"), read_state(tm.initial), "Z", {0});

    struct Triple {
        std::string next;
        int write;
        int move;
        auto operator<=>(const Triple &) const = default;
    };
    std::set<Triple> emitted;

    for (const TmRule &r : tm.rules) {
        Triple t{r.next, r.write, r.move};
        std::string tkey = "w[" + r.next + "," + std::to_string(r.write) + "," +
                           std::to_string(r.move) + "]";
        std::string wx = tkey + ".x";
        std::string wc = tkey + ".z";
        // Entering the write loop: X-measure the current cell.
        m.add_delta(read_state(r.state), outcome_for_bit(r.read), wx, "X", {0});
        if (emitted.insert(t).second) {
            m.add_delta(wx, Outcome::eigenvalue(+1), wc, "Z", {0});
            m.add_delta(wx, Outcome::eigenvalue(-1), wc, "Z", {0});
            // Wrong bit: repeat the X-then-Z round.
            m.add_delta(wc, outcome_for_bit(1 - r.write), wx, "X", {0});
            if (tm.halting.count(r.next)) {
                // Park: one harmless Z at the destination cell, then halt.
                m.add_delta(wc, outcome_for_bit(r.write), "halt[" + r.next + "]", "Z", {r.move});
            } else {
                // Move and read for the next TM state.
                m.add_delta(wc, outcome_for_bit(r.write), read_state(r.next), "Z", {r.move});
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

MachineSpec write_bit_machine(int bit) {
    MachineSpec m;
    m.tapes.push_back({"t0", std::nullopt});
    m.heads.push_back({"h0", "t0", 0});
    m.initial_state = "start";
    m.input_head = m.output_head = "h0";
    m.ensure_state("start");
    Outcome good = Outcome::eigenvalue(bit == 0 ? +1.0 : -1.0);
    Outcome bad = Outcome::eigenvalue(bit == 0 ? -1.0 : +1.0);
    m.add_delta("start", Outcome::initial("init"), "wz", "X", {0});
    m.add_delta("wz", Outcome::eigenvalue(+1), "wc", "Z", {0});
    m.add_delta("wz", Outcome::eigenvalue(-1), "wc", "Z", {0});
    m.add_delta("wc", bad, "wz", "X", {0});
    (void)good;  // halting on the good outcome: no entry
    return m;
}

MachineSpec state_transfer_machine() {
    MachineSpec m;
    m.tapes.push_back({"ta", 1});
    m.tapes.push_back({"tj", std::nullopt});
    m.heads.push_back({"ha", "ta", 0});
    m.heads.push_back({"hj", "tj", 0});
    m.initial_state = "s0";
    m.input_head = "hj";
    m.output_head = "ha";
    m.ensure_state("s0");
    m.add_delta("s0", Outcome::initial("init"), "s1", "ZI", {0, 0});
    m.add_delta("s1", Outcome::eigenvalue(+1), "s2", "XX", {0, 0});
    m.add_delta("s1", Outcome::eigenvalue(-1), "s2", "XX", {0, 0});
    m.add_delta("s2", Outcome::eigenvalue(+1), "s3", "IZ", {0, 0});
    m.add_delta("s2", Outcome::eigenvalue(-1), "s3", "IZ", {0, 0});
    return m;
}

MachineSpec bell_prep_machine() {
    MachineSpec m;
    m.tapes.push_back({"tl", std::nullopt});  // lower: holds c
    m.tapes.push_back({"tu", std::nullopt});  // upper: holds a, b
    m.heads.push_back({"hl", "tl", 0});
    m.heads.push_back({"hu", "tu", 0});
    m.initial_state = "s0";
    m.input_head = "hu";
    m.output_head = "hu";
    m.ensure_state("s0");
    auto both = [&m](const std::string &from, const std::string &to, const std::string &obs,
                     std::vector<int64_t> move) {
        m.add_delta(from, Outcome::eigenvalue(+1), to, obs, move);
        m.add_delta(from, Outcome::eigenvalue(-1), to, obs, move);
    };
    m.add_delta("s0", Outcome::initial("init"), "s1", "IZ", {0, 0});  // Z(a)
    both("s1", "s2", "IZ", {0, 1});                                   // Z(b)
    both("s2", "s3", "ZI", {0, 0});                                   // Z(c)
    both("s3", "s4", "XX", {0, -1});                                  // X(c)⊗X(a)
    both("s4", "s5", "XX", {0, 1});                                   // X(c)⊗X(b)
    both("s5", "s6", "ZI", {0, -1});                                  // Z(c), park hu at a
    return m;
}

}  // namespace mqtm
