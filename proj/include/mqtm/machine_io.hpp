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

#include <stdexcept>
#include <string>

#include "mqtm/machine.hpp"

namespace mqtm {

/// File or flag contents that failed to parse; carries a line number.
class parse_error : public std::runtime_error {
   public:
    parse_error(int line, const std::string &message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

   private:
    int line_;
};

/// Parses the line-oriented machine format:
///
///   tapes:
///     t0 infinite          # or a positive length
///   heads:
///     h0 t0 0              # id, tape, initial cell
///   observables:
///     X                    # builtin name, optionally "NAME BUILTIN"
///   initial: s0 init
///   input-head: h0
///   output-head: h0
///   delta:
///     s0 init -> s1 X 0    # s v -> s' OBS d1[,d2]
///
/// Outcome tokens are eigenvalue literals (+1, -1) or the initial token.
/// Omitted (s, v) rows mean the machine halts there. Comments start with #.
MachineSpec parse_machine(const std::string &text);

std::string serialize_machine(const MachineSpec &machine);

}  // namespace mqtm
