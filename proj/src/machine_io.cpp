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

#include "mqtm/machine_io.hpp"

#include <charconv>
#include <sstream>

namespace mqtm {

namespace {

std::vector<std::string> tokenize(const std::string &line) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : line) {
        if (c == '#') {
            break;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current += c;
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

int64_t parse_int(const std::string &tok, int line) {
    int64_t value = 0;
    const char *begin = tok.c_str();
    if (*begin == '+') {
        begin++;
    }
    auto res = std::from_chars(begin, tok.c_str() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.c_str() + tok.size()) {
        throw parse_error(line, "expected an integer, got '" + tok + "'");
    }
    return value;
}

bool looks_numeric(const std::string &tok) {
    if (tok.empty()) {
        return false;
    }
    size_t i = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
    if (i >= tok.size()) {
        return false;
    }
    for (; i < tok.size(); i++) {
        if (!std::isdigit(static_cast<unsigned char>(tok[i])) && tok[i] != '.' && tok[i] != 'e' &&
            tok[i] != 'E' && tok[i] != '-' && tok[i] != '+') {
            return false;
        }
    }
    return true;
}

}  // namespace

MachineSpec parse_machine(const std::string &text) {
    MachineSpec m;
    m.initial_state.clear();
    struct RawDelta {
        std::string state, token, next, obs;
        std::vector<int64_t> move;
        int line;
    };
    std::vector<RawDelta> raw_delta;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    bool saw_initial = false;

    while (std::getline(in, line)) {
        line_no++;
        auto tokens = tokenize(line);
        if (tokens.empty()) {
            continue;
        }
        const std::string &head = tokens[0];
        if (head == "tapes:" || head == "heads:" || head == "observables:" || head == "delta:") {
            section = head.substr(0, head.size() - 1);
            tokens.erase(tokens.begin());
            if (tokens.empty()) {
                continue;
            }
        } else if (head == "initial:") {
            if (tokens.size() != 3) {
                throw parse_error(line_no, "expected 'initial: STATE TOKEN'");
            }
            m.initial_state = tokens[1];
            m.initial_token = tokens[2];
            saw_initial = true;
            continue;
        } else if (head == "input-head:") {
            if (tokens.size() != 2) {
                throw parse_error(line_no, "expected 'input-head: HEAD'");
            }
            m.input_head = tokens[1];
            continue;
        } else if (head == "output-head:") {
            if (tokens.size() != 2) {
                throw parse_error(line_no, "expected 'output-head: HEAD'");
            }
            m.output_head = tokens[1];
            continue;
        }

        if (section == "tapes") {
            if (tokens.size() != 2) {
                throw parse_error(line_no, "expected 'ID LENGTH|infinite'");
            }
            TapeSpec t{tokens[0], std::nullopt};
            if (tokens[1] != "infinite") {
                t.length = parse_int(tokens[1], line_no);
            }
            m.tapes.push_back(std::move(t));
        } else if (section == "heads") {
            if (tokens.size() != 3) {
                throw parse_error(line_no, "expected 'ID TAPE CELL'");
            }
            m.heads.push_back({tokens[0], tokens[1], parse_int(tokens[2], line_no)});
        } else if (section == "observables") {
            if (tokens.size() != 1 && tokens.size() != 2) {
                throw parse_error(line_no, "expected 'NAME [BUILTIN]'");
            }
            try {
                std::string form = canonical_observable_name(tokens.size() == 2 ? tokens[1] : tokens[0]);
                m.observables[tokens[0]] = form;
            } catch (const std::invalid_argument &e) {
                throw parse_error(line_no, e.what());
            }
        } else if (section == "delta") {
            // s v -> s' OBS d1[,d2]
            if (tokens.size() != 6 || tokens[2] != "->") {
                throw parse_error(line_no, "expected 's v -> s2 OBS moves'");
            }
            RawDelta d;
            d.state = tokens[0];
            d.token = tokens[1];
            d.next = tokens[3];
            d.obs = tokens[4];
            d.line = line_no;
            std::string moves = tokens[5];
            size_t start = 0;
            while (start <= moves.size()) {
                size_t comma = moves.find(',', start);
                std::string part = moves.substr(
                    start, comma == std::string::npos ? std::string::npos : comma - start);
                d.move.push_back(parse_int(part, line_no));
                if (comma == std::string::npos) {
                    break;
                }
                start = comma + 1;
            }
            raw_delta.push_back(std::move(d));
        } else {
            throw parse_error(line_no, "content before any section header");
        }
    }

    if (!saw_initial) {
        throw parse_error(line_no, "missing 'initial:' line");
    }
    m.ensure_state(m.initial_state);
    for (const RawDelta &d : raw_delta) {
        Outcome on = Outcome::initial(m.initial_token);
        if (d.token != m.initial_token) {
            if (!looks_numeric(d.token)) {
                throw parse_error(d.line, "unknown outcome token '" + d.token + "'");
            }
            double v = 0;
            auto res = std::from_chars(
                d.token.c_str() + (d.token[0] == '+' ? 1 : 0), d.token.c_str() + d.token.size(), v);
            if (res.ec != std::errc{}) {
                throw parse_error(d.line, "bad outcome token '" + d.token + "'");
            }
            on = Outcome::eigenvalue(v);
        }
        if (!m.observables.count(d.obs)) {
            throw parse_error(d.line, "delta row uses undeclared observable " + d.obs);
        }
        m.ensure_state(d.state);
        m.ensure_state(d.next);
        m.delta.push_back({d.state, on, {d.next, d.obs, d.move}});
    }
    return m;
}

std::string serialize_machine(const MachineSpec &m) {
    std::ostringstream out;
    out << "tapes:\n";
    for (const TapeSpec &t : m.tapes) {
        out << "  " << t.id << " ";
        if (t.infinite()) {
            out << "infinite";
        } else {
            out << *t.length;
        }
        out << "\n";
    }
    out << "heads:\n";
    for (const HeadSpec &h : m.heads) {
        out << "  " << h.id << " " << h.tape << " " << h.initial_cell << "\n";
    }
    out << "observables:\n";
    for (const auto &[name, form] : m.observables) {
        out << "  " << name;
        if (name != form) {
            out << " " << form;
        }
        out << "\n";
    }
    out << "initial: " << m.initial_state << " " << m.initial_token << "\n";
    out << "input-head: " << m.input_head << "\n";
    out << "output-head: " << m.output_head << "\n";
    out << "delta:\n";
    for (const DeltaEntry &e : m.delta) {
        out << "  " << e.state << " " << e.on.token() << " -> " << e.to.next_state << " "
            << e.to.observable << " ";
        for (size_t i = 0; i < e.to.move.size(); i++) {
            if (i) {
                out << ",";
            }
            out << e.to.move[i];
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace mqtm
