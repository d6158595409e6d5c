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

#include "doctest.h"
#include "mqtm/machine.hpp"
#include "mqtm/machine_io.hpp"
#include "test_util.hpp"

using namespace mqtm;

namespace {

MachineSpec single_head_machine() {
    MachineSpec m;
    m.tapes.push_back({"t0", std::nullopt});
    m.heads.push_back({"h0", "t0", 0});
    m.initial_state = "s0";
    m.initial_token = "init";
    m.input_head = "h0";
    m.output_head = "h0";
    m.ensure_state("s0");
    return m;
}

/// The repeat-until-|0> writer from the classical embedding: X-measure,
/// Z-measure, loop while the Z outcome reads bit 1.
MachineSpec write_zero_machine() {
    MachineSpec m = single_head_machine();
    m.add_delta("s0", Outcome::initial("init"), "wz", "X", {0});
    m.add_delta("wz", Outcome::eigenvalue(+1), "wc", "Z", {0});
    m.add_delta("wz", Outcome::eigenvalue(-1), "wc", "Z", {0});
    m.add_delta("wc", Outcome::eigenvalue(-1), "wz", "X", {0});
    return m;
}

MachineSpec loop_machine() {
    MachineSpec m = single_head_machine();
    m.add_delta("s0", Outcome::initial("init"), "s0", "Z", {0});
    m.add_delta("s0", Outcome::eigenvalue(+1), "s0", "Z", {0});
    m.add_delta("s0", Outcome::eigenvalue(-1), "s0", "Z", {0});
    return m;
}

MachineSpec entangling_machine() {
    MachineSpec m;
    m.tapes.push_back({"t0", std::nullopt});
    m.heads.push_back({"h0", "t0", 0});
    m.heads.push_back({"h1", "t0", 1});
    m.initial_state = "s0";
    m.input_head = "h0";
    m.output_head = "h0";
    m.ensure_state("s0");
    m.add_delta("s0", Outcome::initial("init"), "s1", "XX", {0, 0});
    return m;
}

}  // namespace

TEST_CASE("validate accepts a well-formed machine") {
    CHECK(validate(write_zero_machine()).empty());
}

TEST_CASE("validate flags arity and range violations") {
    MachineSpec m = single_head_machine();
    m.add_delta("s0", Outcome::initial("init"), "s1", "XX", {0});  // arity 2, one head
    auto report = validate(m);
    REQUIRE(!report.empty());

    MachineSpec m2 = write_zero_machine();
    m2.delta[0].to.next_state = "ghost";  // bypass ensure_state
    bool found = false;
    for (const auto &msg : validate(m2)) {
        if (msg.find("undeclared state") != std::string::npos) {
            found = true;
        }
    }
    CHECK(found);

    MachineSpec m3 = write_zero_machine();
    m3.delta.push_back(m3.delta[1]);  // duplicate (state, outcome) key
    CHECK(!validate(m3).empty());
}

TEST_CASE("new_run places the input and tracks cells") {
    Runtime rt = new_run(write_zero_machine(), StateVector::from_bits("1"), 0,
                         AncillaPolicy::zero());
    auto q = rt.qubit_of({0, 0});
    REQUIRE(q.has_value());
    CHECK(*q == 0);
    CHECK(rt.register_state().amplitude(1) == cdouble(1, 0));
    CHECK(rt.head_positions()[0] == 0);
}

TEST_CASE("lazy materialization keeps fresh qubits unentangled") {
    for (auto policy : {AncillaPolicy::zero(), AncillaPolicy::haar_random(99)}) {
        MachineSpec m = single_head_machine();
        m.add_delta("s0", Outcome::initial("init"), "s1", "Z", {5});
        Runtime rt = new_run(m, StateVector::from_bits("1"), 0, policy);
        RandomSource rng(3);
        auto rec = rt.step(rng);
        REQUIRE(rec.has_value());
        CHECK(rt.register_state().num_qubits() == 2);
        for (size_t qi = 0; qi < 2; qi++) {
            CHECK(single_qubit_purity(rt.register_state(), qi) >= 1.0 - 1e-10);
        }
        if (policy.kind == AncillaPolicyKind::Zero) {
            CHECK(rec->measurement.outcome == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("step follows delta and halts when no transition applies") {
    MachineSpec m = single_head_machine();
    m.add_delta("s0", Outcome::initial("init"), "s1", "Z", {0});
    Runtime rt = new_run(m, StateVector::from_bits("1"), 0, AncillaPolicy::zero());
    RandomSource rng(1);
    auto rec = rt.step(rng);
    REQUIRE(rec.has_value());
    CHECK(rec->measurement.outcome == doctest::Approx(-1.0));
    CHECK(rec->post_config.state == "s1");
    auto halted = rt.step(rng);
    CHECK(!halted.has_value());
    CHECK(rt.halted());
    CHECK_THROWS_AS(rt.step(rng), std::runtime_error);
}

TEST_CASE("X measurement of |0> branches evenly") {
    MachineSpec m = single_head_machine();
    m.add_delta("s0", Outcome::initial("init"), "s1", "X", {0});
    int plus = 0;
    RandomSource rng(17);
    for (int i = 0; i < 400; i++) {
        Runtime rt = new_run(m, StateVector::from_bits("0"), 0, AncillaPolicy::zero());
        auto rec = rt.step(rng);
        CHECK(rec->measurement.probability == doctest::Approx(0.5));
        plus += rec->measurement.outcome > 0;
    }
    CHECK(plus > 140);
    CHECK(plus < 260);
}

TEST_CASE("heads move before the measurement") {
    MachineSpec m = single_head_machine();
    m.add_delta("s0", Outcome::initial("init"), "s1", "Z", {1});
    Runtime rt = new_run(m, StateVector::from_bits("1"), 0, AncillaPolicy::zero());
    RandomSource rng(2);
    auto rec = rt.step(rng);
    // Cell 1 is fresh |0>, so the outcome is +1 although cell 0 holds |1>.
    CHECK(rec->measurement.outcome == doctest::Approx(1.0));
    CHECK(rec->cells[0] == CellRef{0, 1});
}

TEST_CASE("run with empty delta halts immediately") {
    MachineSpec m = single_head_machine();
    RandomSource rng(4);
    Runtime rt = new_run(m, StateVector::from_bits("0"), 0, AncillaPolicy::zero());
    auto result = rt.run(rng, 100);
    CHECK(result.status == RunStatus::Halted);
    CHECK(result.trace.empty());
}

TEST_CASE("deterministic loops hit the step limit") {
    RandomSource rng(4);
    Runtime rt = new_run(loop_machine(), StateVector::from_bits("1"), 0, AncillaPolicy::zero());
    auto result = rt.run(rng, 50);
    CHECK(result.status == RunStatus::StepLimit);
    CHECK(result.trace.size() == 50);
}

TEST_CASE("write-zero machine halts with the cell in |0>") {
    RandomSource rng(7);
    for (int trial = 0; trial < 20; trial++) {
        Runtime rt = new_run(write_zero_machine(), StateVector::from_bits("1"), 0,
                             AncillaPolicy::zero());
        auto result = rt.run(rng, 1000);
        REQUIRE(result.status == RunStatus::Halted);
        StateVector out = rt.output_window(1);
        CHECK(fidelity_up_to_global_phase(out, StateVector::from_bits("0")) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("output window returns the input when nothing ran") {
    MachineSpec m = single_head_machine();
    RandomSource rng(4);
    RandomSource input_rng(40);
    StateVector input = mqtm::test::random_state(2, input_rng);
    Runtime rt = new_run(m, input, 0, AncillaPolicy::zero());
    rt.run(rng, 10);
    StateVector out = rt.output_window(2);
    CHECK(fidelity_up_to_global_phase(out, input) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("output window errors") {
    RandomSource rng(4);
    {
        MachineSpec m = single_head_machine();
        Runtime rt = new_run(m, StateVector::from_bits("0"), 0, AncillaPolicy::zero());
        rt.run(rng, 10);
        CHECK_THROWS_AS(rt.output_window(3), std::runtime_error);  // unmaterialized cells
    }
    {
        Runtime rt = new_run(entangling_machine(), StateVector::from_bits("00"), 0,
                             AncillaPolicy::zero());
        rt.run(rng, 10);
        CHECK_THROWS_AS(rt.output_window(1), std::runtime_error);  // entangled with cell 1
        StateVector both = rt.output_window(2);                    // the full pair is fine
        CHECK(both.num_qubits() == 2);
    }
    {
        Runtime rt = new_run(loop_machine(), StateVector::from_bits("1"), 0,
                             AncillaPolicy::zero());
        rt.run(rng, 5);
        CHECK_THROWS_AS(rt.output_window(1), std::runtime_error);  // not halted
    }
}

TEST_CASE("finite tape bounds and head coincidence are errors") {
    {
        MachineSpec m;
        m.tapes.push_back({"t0", 2});
        m.heads.push_back({"h0", "t0", 0});
        m.initial_state = "s0";
        m.input_head = m.output_head = "h0";
        m.ensure_state("s0");
        m.add_delta("s0", Outcome::initial("init"), "s1", "Z", {-1});
        Runtime rt = new_run(m, StateVector::from_bits("0"), 0, AncillaPolicy::zero());
        RandomSource rng(5);
        CHECK_THROWS_AS(rt.step(rng), std::runtime_error);
    }
    {
        MachineSpec m = entangling_machine();
        m.delta[0].to.move = {1, 0};  // both heads land on cell 1
        Runtime rt = new_run(m, StateVector::from_bits("00"), 0, AncillaPolicy::zero());
        RandomSource rng(5);
        CHECK_THROWS_AS(rt.step(rng), std::runtime_error);
    }
}

TEST_CASE("traces are reproducible bit for bit") {
    auto run_once = [](uint64_t seed) {
        RandomSource rng(seed);
        Runtime rt = new_run(write_zero_machine(), StateVector::from_bits("1"), 0,
                             AncillaPolicy::zero());
        rt.run(rng, 1000);
        return rt.trace();
    };
    auto a = run_once(123), b = run_once(123);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); i++) {
        CHECK(a[i].measurement.outcome == b[i].measurement.outcome);
        CHECK(a[i].measurement.probability == b[i].measurement.probability);
        CHECK(a[i].post_config.state == b[i].post_config.state);
    }
    CHECK(run_once(124).size() != 0);
}

TEST_CASE("norm is preserved along every step") {
    RandomSource rng(9);
    Runtime rt = new_run(write_zero_machine(), StateVector::from_bits("1"), 0,
                         AncillaPolicy::zero());
    while (!rt.halted()) {
        if (!rt.step(rng)) {
            break;
        }
        CHECK(rt.register_state().norm_squared() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("replaying a trace reproduces the recorded probabilities") {
    RandomSource rng(11);
    Runtime rt = new_run(write_zero_machine(), StateVector::from_bits("1"), 0,
                         AncillaPolicy::zero());
    auto result = rt.run(rng, 1000);
    REQUIRE(result.status == RunStatus::Halted);

    std::vector<double> outcomes;
    for (const auto &rec : result.trace) {
        outcomes.push_back(rec.measurement.outcome);
    }
    Runtime replay = new_run(write_zero_machine(), StateVector::from_bits("1"), 0,
                             AncillaPolicy::zero());
    auto chooser = mqtm::test::eigenvalue_chooser(outcomes);
    auto replayed = replay.run(chooser, 1000);
    REQUIRE(replayed.trace.size() == result.trace.size());
    for (size_t i = 0; i < replayed.trace.size(); i++) {
        CHECK(replayed.trace[i].measurement.probability ==
              doctest::Approx(result.trace[i].measurement.probability).epsilon(1e-10));
    }
    CHECK(fidelity_up_to_global_phase(replay.register_state(), rt.register_state()) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("machine files round-trip") {
    MachineSpec m = write_zero_machine();
    std::string text = serialize_machine(m);
    MachineSpec back = parse_machine(text);
    CHECK(validate(back).empty());
    CHECK(serialize_machine(back) == text);
    CHECK(back.delta.size() == m.delta.size());
    CHECK(back.initial_state == m.initial_state);

    CHECK_THROWS_AS(parse_machine("delta:\n  s0 zz -> s1 Q 0\n"), parse_error);
    CHECK_THROWS_AS(parse_machine("garbage\n"), parse_error);
}

TEST_CASE("input larger than a finite tape is rejected") {
    MachineSpec m;
    m.tapes.push_back({"t0", 2});
    m.heads.push_back({"h0", "t0", 0});
    m.initial_state = "s0";
    m.input_head = m.output_head = "h0";
    m.ensure_state("s0");
    CHECK_THROWS_AS(new_run(m, StateVector::from_bits("011"), 0, AncillaPolicy::zero()),
                    std::runtime_error);
}
