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

#include <map>

#include "doctest.h"
#include "mqtm/enumerate.hpp"
#include "mqtm/machine_io.hpp"
#include "mqtm/models.hpp"
#include "test_util.hpp"

using namespace mqtm;
using mqtm::test::random_product_state;
using mqtm::test::random_state;

namespace {

ClassicalTM not_tm() {
    ClassicalTM tm;
    tm.states = {"s0", "h"};
    tm.initial = "s0";
    tm.halting = {"h"};
    tm.rules = {{"s0", 0, "h", 1, 0}, {"s0", 1, "h", 0, 0}};
    return tm;
}

// Increments a 3-bit big-endian counter in cells 0..2.
ClassicalTM increment_tm() {
    ClassicalTM tm;
    tm.states = {"m0", "m1", "m2", "c1", "c2", "done"};
    tm.initial = "m0";
    tm.halting = {"done"};
    tm.rules = {
        {"m0", 0, "m1", 0, 1},  {"m0", 1, "m1", 1, 1},  {"m1", 0, "m2", 0, 1},
        {"m1", 1, "m2", 1, 1},  {"m2", 0, "done", 1, 0}, {"m2", 1, "c1", 0, -1},
        {"c1", 0, "done", 1, 0}, {"c1", 1, "c2", 0, -1}, {"c2", 0, "done", 1, 0},
        {"c2", 1, "done", 0, 0},
    };
    return tm;
}

std::string run_tm_machine(const MachineSpec &m, const std::string &bits, RandomSource &rng,
                           size_t max_steps = 10000) {
    Runtime rt = new_run(m, StateVector::from_bits(bits), 0, AncillaPolicy::zero());
    auto result = rt.run(rng, max_steps);
    if (result.status != RunStatus::Halted) {
        return "<step-limit>";
    }
    std::string out;
    OutcomeChooser chooser = sampling_chooser(rng);
    for (size_t i = 0; i < bits.size(); i++) {
        out += rt.read_bit({0, static_cast<int64_t>(i)}, chooser) ? '1' : '0';
    }
    return out;
}

}  // namespace

TEST_CASE("family descriptors enforce observable and move membership") {
    ModelDescriptor c = make_model(ModelFamily::C);
    CHECK(c.allows_observable("X"));
    CHECK(c.allows_observable("Z"));
    CHECK(!c.allows_observable("Y"));
    CHECK(!c.allows_observable("XX"));
    CHECK(c.move_rules[0].permits(-1));
    CHECK(!c.move_rules[0].permits(2));

    ModelDescriptor f = make_model(ModelFamily::F);
    CHECK(f.move_rules[0].permits(0));
    CHECK(!f.move_rules[0].permits(1));  // the one-qubit-tape head is immobile
    CHECK(f.allows_observable("XX+XY"));
    CHECK(!f.allows_observable("XX+YX"));

    ModelDescriptor b = make_model(ModelFamily::B);
    CHECK(b.allows_observable("Y"));
    CHECK(!b.allows_observable("XX"));

    ModelDescriptor a = make_model(ModelFamily::A);
    CHECK(a.allows_observable("XX+YX"));
    CHECK(!a.allows_observable("IX"));
}

TEST_CASE("descriptor check accepts and rejects machines") {
    MachineSpec wz = write_bit_machine(0);
    CHECK(make_model(ModelFamily::C).check(wz).empty());

    // A machine using Y is rejected by the M_C descriptor.
    MachineSpec bad = wz;
    bad.add_delta("wc", Outcome::eigenvalue(+1), "x", "Y", {0});
    CHECK(!make_model(ModelFamily::C).check(bad).empty());

    // Move outside {-1,0,1} is rejected.
    MachineSpec far = wz;
    far.delta[0].to.move = {5};
    CHECK(!make_model(ModelFamily::C).check(far).empty());

    CHECK(make_model(ModelFamily::F).check(state_transfer_machine()).empty());
    CHECK(make_model(ModelFamily::D).check(bell_prep_machine()).empty());
}

TEST_CASE("classical TM oracle runs") {
    auto r = run_classical_tm(increment_tm(), {{0, 0}, {1, 1}, {2, 1}}, 100);
    REQUIRE(r.halted);
    CHECK(r.tape[0] == 1);
    CHECK(r.tape[1] == 0);
    CHECK(r.tape[2] == 0);
}

TEST_CASE("TM files round-trip") {
    std::string text = serialize_classical_tm(increment_tm());
    ClassicalTM back = parse_classical_tm(text);
    CHECK(back.rules.size() == increment_tm().rules.size());
    CHECK(serialize_classical_tm(back) == text);
    CHECK_THROWS_AS(parse_classical_tm("s0 2 -> h 1 0\n"), parse_error);
}

TEST_CASE("compiled single-write TM produces |1> from |0>") {
    ClassicalTM tm;
    tm.states = {"s0", "h"};
    tm.initial = "s0";
    tm.halting = {"h"};
    tm.rules = {{"s0", 0, "h", 1, 0}};
    MachineSpec m = compile_classical_tm(tm);
    CHECK(validate(m).empty());
    CHECK(make_model(ModelFamily::C).check(m).empty());
    RandomSource rng(3);
    for (int i = 0; i < 20; i++) {
        CHECK(run_tm_machine(m, "0", rng) == "1");
    }
}

TEST_CASE("compiled NOT TM flips its cell") {
    MachineSpec m = compile_classical_tm(not_tm());
    RandomSource rng(5);
    for (int i = 0; i < 20; i++) {
        CHECK(run_tm_machine(m, "0", rng) == "1");
        CHECK(run_tm_machine(m, "1", rng) == "0");
    }
}

TEST_CASE("compiled increment TM computes 011 -> 100") {
    MachineSpec m = compile_classical_tm(increment_tm());
    CHECK(make_model(ModelFamily::C).check(m).empty());
    // Oracle agreement on all 3-bit inputs.
    RandomSource rng(7);
    for (int value = 0; value < 8; value++) {
        std::string bits = {char('0' + ((value >> 2) & 1)), char('0' + ((value >> 1) & 1)),
                            char('0' + (value & 1))};
        auto oracle = run_classical_tm(increment_tm(),
                                       {{0, bits[0] - '0'}, {1, bits[1] - '0'}, {2, bits[2] - '0'}},
                                       100);
        std::string expect;
        for (int i = 0; i < 3; i++) {
            expect += char('0' + (oracle.tape.count(i) ? oracle.tape[i] : 0));
        }
        CHECK(run_tm_machine(m, bits, rng) == expect);
    }
}

TEST_CASE("compiled TM state count is linear in the rule count") {
    MachineSpec m = compile_classical_tm(increment_tm());
    // start + one read state per live TM state + two write states per
    // distinct (next, write, move) triple + halting parks.
    CHECK(m.states.size() <= 2 + 5 + 2 * increment_tm().rules.size() + 2);
}

TEST_CASE("M_C machines never entangle the tape") {
    MachineSpec m = compile_classical_tm(increment_tm());
    RandomSource rng(11);
    for (int trial = 0; trial < 10; trial++) {
        Runtime rt = new_run(m, StateVector::from_bits("011"), 0, AncillaPolicy::zero());
        auto result = rt.run(rng, 10000);
        REQUIRE(result.status == RunStatus::Halted);
        for (size_t q = 0; q < rt.register_state().num_qubits(); q++) {
            CHECK(single_qubit_purity(rt.register_state(), q) >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("write-bit fragment machine matches the register-level writer") {
    // Outcome paths of the machine agree with classical_write's paths, in
    // distribution and in written state.
    MachineSpec m = write_bit_machine(0);
    StateVector dummy;
    auto machine_paths = enumerate_paths(
        dummy,
        [&m](StateVector &reg, const OutcomeChooser &chooser) {
            Runtime rt = new_run(m, StateVector::from_bits("1"), 0, AncillaPolicy::zero());
            rt.run(chooser, 100);
            if (!rt.halted()) {
                throw std::runtime_error("did not halt");
            }
            reg = rt.register_state();
        },
        1e-7);
    StateVector one = StateVector::from_bits("1");
    auto register_paths = enumerate_paths(
        one,
        [](StateVector &reg, const OutcomeChooser &chooser) {
            classical_write(reg, 0, 0, chooser);
        },
        1e-7);
    std::map<std::string, double> lhs, rhs;
    for (const auto &p : machine_paths) {
        std::string key;
        for (double o : p.outcomes) {
            key += o > 0 ? '+' : '-';
        }
        lhs[key] += p.probability;
        CHECK(fidelity_up_to_global_phase(p.state, StateVector::from_bits("0")) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
    for (const auto &p : register_paths) {
        std::string key;
        for (double o : p.outcomes) {
            key += o > 0 ? '+' : '-';
        }
        rhs[key] += p.probability;
    }
    REQUIRE(lhs.size() == rhs.size());
    for (const auto &[key, prob] : lhs) {
        CHECK(rhs.count(key) == 1);
        CHECK(rhs[key] == doctest::Approx(prob).epsilon(1e-12));
    }
}

TEST_CASE("state-transfer fragment machine matches the register-level protocol") {
    RandomSource prep(13);
    StateVector psi = haar_random_qubit(prep);
    MachineSpec m = state_transfer_machine();
    StateVector dummy;
    auto machine_paths =
        enumerate_paths(dummy, [&m, &psi](StateVector &reg, const OutcomeChooser &chooser) {
            Runtime rt = new_run(m, psi, 0, AncillaPolicy::zero());
            rt.run(chooser, 10);
            if (!rt.halted()) {
                throw std::runtime_error("did not halt");
            }
            // Register order: input qubit (infinite tape) first, then the
            // lazily materialized one-qubit tape cell.
            reg = rt.register_state();
        });
    StateVector initial = psi.tensor(StateVector::from_bits("0"));
    auto register_paths =
        enumerate_paths(initial, [](StateVector &reg, const OutcomeChooser &chooser) {
            state_transfer(reg, 0, 1, chooser);
        });
    REQUIRE(machine_paths.size() == register_paths.size());
    std::map<std::string, std::pair<double, const StateVector *>> lhs;
    for (const auto &p : machine_paths) {
        std::string key;
        for (double o : p.outcomes) {
            key += o > 0 ? '+' : '-';
        }
        lhs[key] = {p.probability, &p.state};
    }
    for (const auto &p : register_paths) {
        std::string key;
        for (double o : p.outcomes) {
            key += o > 0 ? '+' : '-';
        }
        REQUIRE(lhs.count(key) == 1);
        CHECK(lhs[key].first == doctest::Approx(p.probability).epsilon(1e-12));
        CHECK(fidelity_up_to_global_phase(*lhs[key].second, p.state) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("Bell-prep fragment machine matches the register-level protocol") {
    MachineSpec m = bell_prep_machine();
    StateVector dummy;
    auto machine_paths =
        enumerate_paths(dummy, [&m](StateVector &reg, const OutcomeChooser &chooser) {
            Runtime rt = new_run(m, StateVector(), 0, AncillaPolicy::zero());
            rt.run(chooser, 10);
            if (!rt.halted()) {
                throw std::runtime_error("did not halt");
            }
            reg = rt.register_state();
        });
    // Machine materialization order: c (lower head), a, then b; the
    // register-level script runs on (a, b, c) = (1, 2, 0).
    StateVector initial = StateVector::from_bits("000");
    auto register_paths =
        enumerate_paths(initial, [](StateVector &reg, const OutcomeChooser &chooser) {
            bell_prepare_cross_tape(reg, 1, 2, 0, chooser);
        });
    REQUIRE(machine_paths.size() == register_paths.size());
    std::map<std::string, std::pair<double, const StateVector *>> lhs;
    for (const auto &p : machine_paths) {
        std::string key;
        for (double o : p.outcomes) {
            key += o > 0 ? '+' : '-';
        }
        lhs[key] = {p.probability, &p.state};
    }
    for (const auto &p : register_paths) {
        std::string key;
        for (double o : p.outcomes) {
            key += o > 0 ? '+' : '-';
        }
        REQUIRE(lhs.count(key) == 1);
        CHECK(lhs[key].first == doctest::Approx(p.probability).epsilon(1e-12));
        CHECK(fidelity_up_to_global_phase(*lhs[key].second, p.state) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("program files round-trip and validate") {
    MeasurementProgram prog = parse_program("XX 0 1\nloop: ZZ 1 2 -> loop\nXX+YX 0 2\n");
    REQUIRE(prog.ops.size() == 3);
    CHECK(prog.ops[1].label == "loop");
    CHECK(prog.ops[1].branch_minus == "loop");
    CHECK(prog.num_logical() == 3);
    CHECK(serialize_program(prog) == "XX 0 1\nloop: ZZ 1 2 -> loop\nXX+YX 0 2\n");
    CHECK_THROWS_AS(parse_program("YY 0 1\n"), parse_error);  // not in the M_A set
    CHECK_THROWS_AS(parse_program("XX 0 0\n"), parse_error);
    CHECK_THROWS_AS(parse_program("XX 0 1 -> nowhere\n"), parse_error);
}

TEST_CASE("parity rule: cross-parity measurements run without teleports") {
    MeasurementProgram prog = parse_program("XX 1 2\n");
    RandomSource rng(17);
    StateVector input = random_product_state(3, rng);
    auto result = simulate_program_on(ModelFamily::D, prog, input, rng);
    CHECK(result.move_rounds.empty());  // qubits 1 (upper) and 2 (lower)
    CHECK(result.measurement_count == 1);
}

TEST_CASE("parity rule: same-parity measurements teleport and return") {
    MeasurementProgram prog = parse_program("ZZ 0 2\n");
    RandomSource rng(19);
    StateVector input = random_product_state(3, rng);
    auto result = simulate_program_on(ModelFamily::D, prog, input, rng);
    CHECK(result.move_rounds.size() == 2);  // one teleport out, one back
    CHECK(result.measurement_count > 1);
}

TEST_CASE("reductions match flat execution on single measurements") {
    RandomSource rng(23);
    for (const char *text : {"XX 0 1\n", "ZX 0 1\n", "XX+YX 0 1\n", "XI 0 1\n", "ZZ 0 2\n"}) {
        MeasurementProgram prog = parse_program(text);
        StateVector input = random_product_state(std::max<size_t>(prog.num_logical(), 2), rng);
        for (auto family : {ModelFamily::D, ModelFamily::E, ModelFamily::F}) {
            auto report = check_reduction_equivalence(family, prog, input);
            INFO("program ", text, " family ", model_family_name(family));
            CHECK(report.passed(1e-9));
        }
    }
}

TEST_CASE("reduced runs stay inside the family observable set") {
    MeasurementProgram prog = parse_program("XX+YX 0 2\nZZ 1 3\nXZ 0 1\n");
    RandomSource rng(29);
    StateVector input = random_product_state(4, rng);
    for (auto family : {ModelFamily::D, ModelFamily::E, ModelFamily::F}) {
        ModelDescriptor d = make_model(family);
        auto result = simulate_program_on(family, prog, input, rng);
        for (const std::string &name : result.machine_observables) {
            INFO("family ", model_family_name(family), " used ", name);
            CHECK(d.allows_observable(name));
        }
    }
}

TEST_CASE("branching programs follow their branch labels under reduction") {
    // Second row re-measures qubit pair (0,1) in Z⊗Z when the X⊗X outcome
    // was -1; flat and reduced agree.
    MeasurementProgram prog = parse_program("XX 0 1 -> fix\nXI 0 1\nfix: ZZ 0 1\n");
    RandomSource rng(31);
    StateVector input = random_product_state(2, rng);
    for (auto family : {ModelFamily::D, ModelFamily::F}) {
        auto report = check_reduction_equivalence(family, prog, input);
        CHECK(report.passed(1e-9));
    }
}
