#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <randpulse/rvm.hpp>
#include <randpulse/stats.hpp>

using namespace randpulse;
using namespace randpulse::rvm;

TEST_CASE("parser: labels, comments, commas, register bounds") {
    Program p = parse_program(R"(
        ; a little straight-line program
        start: LOADI r0, 2.5
        LOADI r1, 4
        ADD r0, r1       ; r0 = 6.5
        CMP r0, r1
        IF GT done
        LOADI r2, 99
        done: HALT
    )");
    CHECK(p.instructions.size() == 7);
    CHECK(p.labels.at("start") == 0);
    CHECK(p.labels.at("done") == 6);
    CHECK(p.instructions[4].op == Opcode::IF);
    CHECK(p.instructions[4].targets == std::vector<int>{6});

    CHECK_THROWS_WITH_AS(parse_program("LOADI r16, 1"), doctest::Contains("out of range"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("FROB r0"), doctest::Contains("unknown instruction"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("GOTO nowhere"), doctest::Contains("unresolved label"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("RIF 1.5 EQ a b\na: HALT\nb: HALT"),
                         doctest::Contains("prob"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_program("MOV r0"), doctest::Contains("line 1"),
                         std::runtime_error);
    // the diagnostic carries a single line prefix
    try {
        parse_program("\nIF XX done\ndone: HALT");
        FAIL("expected throw");
    } catch (const std::runtime_error& ex) {
        std::string msg = ex.what();
        CHECK(msg.find("line 2:") == 0);
        CHECK(msg.find("line 2: line 2:") == std::string::npos);
    }
}

TEST_CASE("straight-line arithmetic and the comparison flag") {
    Program p = parse_program(R"(
        LOADI r1, 10
        LOADI r2, 3
        MOV r3, r1
        SUB r3, r2       ; 7
        ADD r3, r3       ; 14
        CMP r3, r1       ; 14 - 10 = 4
        IF LT bad
        HALT
        bad: LOADI r15, 1
        HALT
    )");
    EntropySource root(1);
    RunResult r = run(p, {}, root);
    CHECK(r.state.halted);
    CHECK(!r.state.fuel_exhausted);
    CHECK(r.state.registers[3] == 14.0);
    CHECK(r.state.registers[15] == 0.0);
    CHECK(r.state.cmp == 4.0);
    CHECK(r.branch_trace.empty());   // IF is deterministic, not traced

    // inputs preload the low registers
    Program q = parse_program("ADD r0, r1\nHALT");
    EntropySource root2(1);
    RunResult r2 = run(q, {1.5, 2.25}, root2);
    CHECK(r2.state.registers[0] == 3.75);
}

TEST_CASE("rnd24: 24 msb-first bits, endpoint values, register write") {
    EntropySource zeros = EntropySource::forced(false);
    CHECK(rnd24(zeros) == 0.0);
    CHECK(zeros.bits_consumed() == 24);

    EntropySource ones = EntropySource::forced(true);
    CHECK(rnd24(ones) == doctest::Approx((double(0xFFFFFF)) * 0x1.0p-24));

    // msb-first: script 1 then 23 zeros -> exactly 1/2
    std::vector<bool> script(24, false);
    script[0] = true;
    EntropySource s = EntropySource::scripted(script);
    CHECK(rnd24(s) == 0.5);

    Program p = parse_program("RND24 r7\nHALT");
    EntropySource root(3);
    RunResult r = run(p, {}, root);
    CHECK(r.state.registers[7] >= 0.0);
    CHECK(r.state.registers[7] < 1.0);

    // determinism under the same seed
    EntropySource root2(3);
    CHECK(run(p, {}, root2).state.registers[7] == r.state.registers[7]);
}

TEST_CASE("RIF: prob endpoints reduce to IF; no entropy burned when cond is false") {
    // cond false: deterministic else, even at prob 1
    Program p = parse_program(R"(
        CMP r0, r0       ; cmp = 0
        RIF 1.0 NE then else
        then: LOADI r1, 1
        HALT
        else: LOADI r2, 1
        HALT
    )");
    EntropySource dead = EntropySource::scripted({});   // throws if any bit is read
    RunResult r = run(p, {}, dead);
    CHECK(r.state.registers[2] == 1.0);
    CHECK(r.state.registers[1] == 0.0);
    REQUIRE(r.branch_trace.size() == 1);
    CHECK(r.branch_trace[0].kind == BranchKind::rif_else);

    // cond true at prob 1: always then; at prob 0: always else
    Program q = parse_program(R"(
        CMP r0, r0
        RIF 1.0 EQ then else
        then: LOADI r1, 1
        HALT
        else: LOADI r2, 1
        HALT
    )");
    EntropySource root(5);
    CHECK(run(q, {}, root).state.registers[1] == 1.0);
    Program q0 = parse_program(R"(
        CMP r0, r0
        RIF 0.0 EQ then else
        then: LOADI r1, 1
        HALT
        else: LOADI r2, 1
        HALT
    )");
    CHECK(run(q0, {}, root).state.registers[2] == 1.0);
}

TEST_CASE("RIF branching frequency matches prob (cond held true)") {
    Program p = parse_program(R"(
        CMP r0, r0
        RIF 0.25 EQ then else
        then: LOADI r1, 1
        HALT
        else: HALT
    )");
    EntropySource root(7);
    std::size_t n = 100000, thens = 0;
    for (std::size_t i = 0; i < n; ++i) {
        EntropySource trial = root.fork("trial" + std::to_string(i));
        RunResult r = run(p, {}, trial);
        REQUIRE(r.branch_trace.size() == 1);
        thens += r.branch_trace[0].kind == BranchKind::rif_then;
    }
    double sigma = std::sqrt(double(n) * 0.25 * 0.75);
    CHECK(std::fabs(double(thens) - 0.25 * double(n)) < 3.0 * sigma);
}

TEST_CASE("RGOTO: single label is deterministic, 4 labels exact 2 bits, 3 labels uniform") {
    Program one = parse_program("RGOTO only\nonly: HALT");
    EntropySource dead = EntropySource::scripted({});
    RunResult r1 = run(one, {}, dead);
    CHECK(r1.state.halted);
    CHECK(r1.branch_trace[0].taken == 0);

    // 4 targets: exactly two bits, msb-first index
    Program four = parse_program(R"(
        RGOTO a, b, c, d
        a: LOADI r1, 0
        HALT
        b: LOADI r1, 1
        HALT
        c: LOADI r1, 2
        HALT
        d: LOADI r1, 3
        HALT
    )");
    for (int want = 0; want < 4; ++want) {
        EntropySource s = EntropySource::scripted({bool(want & 2), bool(want & 1)});
        RunResult r = run(four, {}, s);
        CHECK(r.state.registers[1] == double(want));
        CHECK(s.bits_consumed() == 2);
    }

    // 3 targets: rejection keeps the law uniform
    Program three = parse_program(R"(
        RGOTO a, b, c
        a: LOADI r1, 0
        HALT
        b: LOADI r1, 1
        HALT
        c: LOADI r1, 2
        HALT
    )");
    EntropySource root(11);
    std::size_t n = 90000;
    std::vector<double> obs(3, 0.0), exp(3, double(n) / 3.0);
    for (std::size_t i = 0; i < n; ++i) {
        EntropySource trial = root.fork("t" + std::to_string(i));
        RunResult r = run(three, {}, trial);
        obs[std::size_t(r.state.registers[1])] += 1.0;
    }
    auto chi = stats::chi2_gof(obs, exp);
    CHECK(chi.p_value > 0.001);
}

TEST_CASE("coin-ladder program matches the exact Markov-chain law") {
    // flip three fair coins by RGOTO and count heads in r1
    Program p = parse_program(R"(
        LOADI r2, 1
        RGOTO h1, t1
        h1: ADD r1, r2
        t1: RGOTO h2, t2
        h2: ADD r1, r2
        t2: RGOTO h3, t3
        h3: ADD r1, r2
        t3: HALT
    )");
    EntropySource root(13);
    std::size_t n = 80000;
    std::vector<double> obs(4, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        EntropySource trial = root.fork("c" + std::to_string(i));
        RunResult r = run(p, {}, trial);
        obs[std::size_t(r.state.registers[1])] += 1.0;
    }
    std::vector<double> exp = {double(n) / 8.0, 3.0 * double(n) / 8.0, 3.0 * double(n) / 8.0,
                               double(n) / 8.0};
    auto chi = stats::chi2_gof(obs, exp);
    CHECK(chi.p_value > 0.001);
}

TEST_CASE("branch trace distinguishes runs that end in the same state") {
    // both RGOTO targets converge on the same continuation: final registers are
    // identical, but the trace records which path was taken
    Program p = parse_program(R"(
        RGOTO a, b
        a: GOTO join
        b: GOTO join
        join: LOADI r1, 7
        HALT
    )");
    int seen[2] = {0, 0};
    EntropySource root(17);
    for (int i = 0; i < 64; ++i) {
        EntropySource trial = root.fork("p" + std::to_string(i));
        RunResult r = run(p, {}, trial);
        CHECK(r.state.registers[1] == 7.0);
        REQUIRE(r.branch_trace.size() == 1);
        ++seen[r.branch_trace[0].taken];
    }
    CHECK(seen[0] > 0);
    CHECK(seen[1] > 0);
}

TEST_CASE("fuel exhaustion is reported, not thrown") {
    Program p = parse_program("loop: GOTO loop");
    EntropySource root(19);
    RunResult r = run(p, {}, root, 1000);
    CHECK(!r.state.halted);
    CHECK(r.state.fuel_exhausted);
    CHECK(r.state.steps == 1000);
}
