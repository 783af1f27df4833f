#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <randpulse/freq_ops.hpp>
#include <randpulse/logic.hpp>

using namespace randpulse;

namespace {

PulseTrain make_rpt(double f, double w, double T, std::uint64_t seed) {
    EntropySource root(seed);
    EntropySource src = root.fork("rpt");
    return generate_rpt(src, RateHz(f), w, T);
}

} // namespace

TEST_CASE("divide_random: stage 0 identity, rate f/2^s, output stays exponential") {
    PulseTrain in = make_rpt(1000.0, 1e-6, 200.0, 41);
    EntropySource root(42);
    EntropySource e0 = root.fork("d0"), e1 = root.fork("d1"), e4 = root.fork("d4");
    CHECK(divide_random(in, 0, e0).edges == in.edges);

    PulseTrain half = divide_random(in, 1, e1);
    double expect = double(in.count()) / 2.0;
    CHECK(std::fabs(double(half.count()) - expect) < 3.0 * std::sqrt(expect / 2.0));
    CHECK(ks_check(waiting_times(half), ExponentialModel{500.0}).p_value > 0.001);

    PulseTrain sixteenth = divide_random(in, 4, e4);
    CHECK(ks_check(waiting_times(sixteenth), ExponentialModel{1000.0 / 16.0}).p_value > 0.001);
}

TEST_CASE("divide_det: Erlang waiting times, restore via level doubling") {
    PulseTrain in = make_rpt(1000.0, 1e-6, 100.0, 7);
    CHECK_THROWS_AS(divide_det(in, 0), std::invalid_argument);
    CHECK(divide_det(in, 1).edges == in.edges);

    PulseTrain by2 = divide_det(in, 2);
    CHECK(ks_check(waiting_times(by2), ErlangModel{1000.0, 2}).p_value > 0.001);
    // Erlang(2) is visibly non-exponential
    CHECK(ks_check(waiting_times(by2), ExponentialModel{500.0}).p_value < 1e-6);

    // divide-by-two as a toggle level keeps every edge; doubling restores the input
    LevelTrace lvl = divide_det2_level(in);
    PulseTrain restored = edge_double(lvl, in.width);
    CHECK(restored.edges == in.edges);
}

TEST_CASE("random division restores the exponential law that deterministic division destroys") {
    // Erlang(2) input: KS distance to the best-rate exponential shrinks after 2_R
    // and shrinks further after another four random stages.
    PulseTrain raw = make_rpt(2000.0, 1e-6, 400.0, 11);
    PulseTrain erl = divide_det(raw, 2);   // rate 1000, Erlang(2000, 2) gaps
    EntropySource root(12);
    EntropySource ea = root.fork("a"), eb = root.fork("b");
    PulseTrain r2 = divide_random(erl, 1, ea);
    PulseTrain r16 = divide_random(r2, 3, eb);

    auto ks_to_exp = [](const PulseTrain& t) {
        auto gaps = waiting_times(t);
        double mean = 0.0;
        for (double g : gaps) mean += g;
        mean /= double(gaps.size());
        return ks_check(gaps, ExponentialModel{1.0 / mean}).statistic;
    };
    double d0 = ks_to_exp(erl), d1 = ks_to_exp(r2), d2 = ks_to_exp(r16);
    CHECK(d1 < d0);
    CHECK(d2 < d1);
}

TEST_CASE("structural divide-by-four: random rate f/4, forced-1 entropy degenerates to f/2") {
    Netlist nl = build_divider_2r2d();
    double f = 2000.0, T = 100.0;
    LevelTrace clock = make_clock(f, T);

    Trace tr = simulate(nl, {{"CP", clock}}, {.horizon = T, .entropy = EntropySource(3)});
    double n_out = double(rising_edges(tr.at(nl.port("Q"))).size());
    double expect = f * T / 4.0;
    // each output period is the sum of two Geometric(1/2) clock counts; var 8/clock pair
    CHECK(std::fabs(n_out - expect) < 3.0 * std::sqrt(expect / 2.0) + 2.0);

    // forced-1 entropy turns the DRFF into a DFF: a plain divide-by-two
    Trace det = simulate(nl, {{"CP", clock}}, {.horizon = T, .entropy = EntropySource::forced(true)});
    double n_det = double(rising_edges(det.at(nl.port("Q"))).size());
    CHECK(n_det == f * T / 2.0);   // Q toggles every clock => rising edges at f/2
}

TEST_CASE("random counter: behavioral model matches the structural netlist bit for bit") {
    unsigned width = 3;
    std::size_t clocks = 2000;
    EntropySource root(91);
    auto states = random_counter(width, clocks, root);

    Netlist nl = build_random_counter(width);
    double f = 1000.0, T = double(clocks) / f;
    LevelTrace clock = make_clock(f, T);
    Trace tr = simulate(nl, {{"CP", clock}}, {.horizon = T, .entropy = EntropySource(91)});
    auto edges = rising_edges(clock);
    for (unsigned b = 0; b < width; ++b) {
        auto bits = sample_at(tr.at(nl.port("Q" + std::to_string(b))), edges);
        REQUIRE(bits.size() == clocks);
        for (std::size_t c = 0; c < clocks; ++c)
            REQUIRE(bits[c] == bool((states[c].value >> b) & 1));
    }
}

TEST_CASE("random counter statistics: bit 0 balanced, 2-bit states uniform") {
    EntropySource root(17);
    std::size_t clocks = 200000;
    auto states = random_counter(2, clocks, root);
    std::map<std::uint32_t, std::size_t> hist;
    double bit0 = 0.0;
    for (const auto& s : states) {
        ++hist[s.value];
        bit0 += s.value & 1;
    }
    CHECK(std::fabs(bit0 / double(clocks) - 0.5) < 3.0 * 0.5 / std::sqrt(double(clocks)));
    for (std::uint32_t v = 0; v < 4; ++v) {
        double p = double(hist[v]) / double(clocks);
        CHECK(std::fabs(p - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / double(clocks)));
    }
}

TEST_CASE("mu realizable set: exact small cases and cardinality") {
    CHECK(mu_realizable_set(1) == std::vector<std::uint64_t>{1});
    CHECK(mu_realizable_set(2) == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(mu_realizable_set(4) == std::vector<std::uint64_t>{1, 2, 3, 4, 6, 7, 8, 12, 14, 15});
    for (unsigned n = 1; n <= 24; ++n)
        CHECK(mu_realizable_set(n).size() == std::size_t(n) * (n + 1) / 2);
    // 5 * 2^{N-3} = 20 has odd part 5, not of the form 2^b - 1
    auto s6 = mu_realizable_set(6);
    CHECK(std::find(s6.begin(), s6.end(), 20u) == s6.end());
    CHECK_THROWS_AS(mu_realizable_set(0), std::invalid_argument);
    CHECK_THROWS_AS(mu_realizable_set(64), std::invalid_argument);
}

TEST_CASE("mu multiplier: rates f/2 and 3f/8 within statistical tolerance") {
    PulseTrain in = make_rpt(1000.0, 1e-6, 400.0, 23);
    EntropySource root(24);
    EntropySource e1 = root.fork("half"), e2 = root.fork("threeeighth");

    // mu = 2^-0 (1 - 2^-1) = 1/2
    PulseTrain half = mu_multiplier(in, 1, 0, e1);
    double expect = double(in.count()) / 2.0;
    CHECK(std::fabs(double(half.count()) - expect) < 3.0 * std::sqrt(expect / 2.0));

    // mu = 2^-1 (1 - 2^-2) = 3/8
    PulseTrain te = mu_multiplier(in, 2, 1, e2);
    double mu = 3.0 / 8.0;
    double expect2 = double(in.count()) * mu;
    CHECK(std::fabs(double(te.count()) - expect2) <
          3.0 * std::sqrt(double(in.count()) * mu * (1.0 - mu)));
    CHECK_THROWS_AS(mu_multiplier(in, 0, 1, e1), std::invalid_argument);
}

TEST_CASE("lambda factor: switch pattern, endpoints, exhaustive survival law") {
    LambdaFactor lf(8, 0b10110001);
    // switch i (1-based from the input) reflects bit N-i of k
    CHECK(lf.switch_closed(1));
    CHECK(!lf.switch_closed(2));
    CHECK(lf.switch_closed(3));
    CHECK(lf.switch_closed(4));
    CHECK(!lf.switch_closed(5));
    CHECK(lf.switch_closed(8));
    CHECK(!lf.residual_closed());
    CHECK(lf.lambda() == doctest::Approx(double(0b10110001) / 256.0));

    CHECK(LambdaFactor(8, 256).residual_closed());
    CHECK(LambdaFactor(8, 256).lambda() == 1.0);
    CHECK(LambdaFactor(8, 0).lambda() == 0.0);
    CHECK_THROWS_AS(LambdaFactor(8, 257), std::invalid_argument);
    CHECK_THROWS_AS(LambdaFactor(0, 0), std::invalid_argument);

    // brute force: over all 2^N routing-bit patterns exactly k survive (N <= 4)
    for (unsigned n = 1; n <= 4; ++n) {
        for (std::uint64_t k = 0; k <= (std::uint64_t(1) << n); ++k) {
            LambdaFactor f(n, k);
            unsigned survivors = 0;
            for (std::uint32_t pat = 0; pat < (1u << n); ++pat) {
                std::vector<bool> bits;
                for (unsigned i = 0; i < n; ++i) bits.push_back((pat >> i) & 1);
                EntropySource src = EntropySource::scripted(bits);
                if (lambda_route_pulse(f, src)) ++survivors;
            }
            // k < 2^N: exactly k of the 2^N equally likely patterns survive.
            // k = 2^N: every pattern survives (residual path closed).
            CHECK(survivors == (k == (std::uint64_t(1) << n) ? (1u << n) : unsigned(k)));
        }
    }
}

TEST_CASE("lambda multiplier rates: k in {1, 5, 128, 255}, N = 8") {
    PulseTrain in = make_rpt(5000.0, 1e-6, 100.0, 31);   // ~5e5 pulses
    EntropySource root(32);
    for (std::uint64_t k : {std::uint64_t(1), std::uint64_t(5), std::uint64_t(128), std::uint64_t(255)}) {
        EntropySource e = root.fork("k" + std::to_string(k));
        PulseTrain out = lambda_multiplier(in, LambdaFactor(8, k), e);
        double p = double(k) / 256.0;
        double expect = double(in.count()) * p;
        double sigma = std::sqrt(double(in.count()) * p * (1.0 - p));
        CHECK(std::fabs(double(out.count()) - expect) < 3.0 * sigma);
    }
    // endpoints are exact
    EntropySource e0 = root.fork("k0"), e256 = root.fork("k256");
    CHECK(lambda_multiplier(in, LambdaFactor(8, 0), e0).count() == 0);
    CHECK(lambda_multiplier(in, LambdaFactor(8, 256), e256).edges == in.edges);
}

TEST_CASE("structural lambda netlist: resources, forced routing, behavioral equivalence") {
    for (unsigned n : {2u, 4u, 8u}) {
        Netlist nl = build_lambda_netlist(LambdaFactor(n, 1));
        auto res = lambda_resources(nl);
        CHECK(res.drff_class == n);
        CHECK(res.ordinary_ff == (n * n + 3 * n) / 2);
        CHECK_NOTHROW(nl.validate());
    }

    // forced-1 routing: every pulse exits at stage 1, so survival == switch 1
    // state == MSB of k (for k < 2^N)
    double T = 1.0;
    PulseTrain in = make_rpt(200.0, 1e-4, T, 55);
    for (std::uint64_t k : {std::uint64_t(0b1010), std::uint64_t(0b0101)}) {
        LambdaFactor lf(4, k);
        Netlist nl = build_lambda_netlist(lf);
        LevelTrace stim = to_level(in);
        Trace tr = simulate(nl, {{"IN", stim}},
                            {.horizon = T, .entropy = EntropySource::forced(true)});
        auto out_edges = rising_edges(tr.at(nl.port("OUT")));
        if (lf.switch_closed(1)) {
            CHECK(out_edges.size() == in.count());
        } else {
            CHECK(out_edges.empty());
        }
    }

    // random routing: structural rate matches the behavioral Bernoulli law
    PulseTrain busy = make_rpt(2000.0, 1e-5, 50.0, 56);
    LambdaFactor lf(4, 5);
    Netlist nl = build_lambda_netlist(lf);
    Trace tr = simulate(nl, {{"IN", to_level(busy)}},
                        {.horizon = 50.0, .entropy = EntropySource(57)});
    double got = double(rising_edges(tr.at(nl.port("OUT"))).size());
    double p = 5.0 / 16.0;
    double expect = double(busy.count()) * p;
    CHECK(std::fabs(got - expect) < 3.0 * std::sqrt(double(busy.count()) * p * (1.0 - p)));
}

TEST_CASE("synthesizer: endpoints and a mid-scale target rate") {
    double T = 200.0, w = 1e-6;
    RateHz f1(400.0), f2(1000.0);

    // k = 0: output is the base train alone
    EntropySource r0(61);
    PulseTrain lo = synthesize(f1, f2, LambdaFactor(8, 0), r0, w, T);
    double e1 = f1.value * T;
    CHECK(std::fabs(double(lo.count()) - e1) < 3.0 * std::sqrt(e1) + 2.0);

    // k = 2^N: output rate is the full f2
    EntropySource r1(62);
    PulseTrain hi = synthesize(f1, f2, LambdaFactor(8, 256), r1, w, T);
    double e2 = f2.value * T;
    CHECK(std::fabs(double(hi.count()) - e2) < 3.0 * std::sqrt(e2) + 2.0);

    // mid scale: f1 + (k/2^N)(f2 - f1) = 400 + (85/256) * 600 ~ 599.2
    EntropySource r2(63);
    LambdaFactor lf(8, 85);
    PulseTrain mid = synthesize(f1, f2, lf, r2, w, T);
    double target = (f1.value + lf.lambda() * (f2.value - f1.value)) * T;
    CHECK(std::fabs(double(mid.count()) - target) < 3.0 * std::sqrt(target) + 2.0);
    CHECK(is_canonical(mid));

    EntropySource r3(64);
    CHECK_THROWS_AS(synthesize(f2, f1, lf, r3, w, T), std::invalid_argument);
}
