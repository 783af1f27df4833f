// randpulse: randomness-preserving frequency division, random counters,
// the mu-multiplier realizable set and the lambda-multiplier/synthesizer.
#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "randpulse/entropy.hpp"
#include "randpulse/logic.hpp"
#include "randpulse/pulse_train.hpp"

namespace randpulse {

/// Random divider by 2^s: each pulse is kept independently with
/// probability 2^-s. Preserves the exponential waiting-time law.
inline PulseTrain divide_random(const PulseTrain& train, unsigned stages, EntropySource& entropy) {
    if (stages == 0) return train;
    PulseTrain out{{}, train.width, train.horizon};
    for (double e : train.edges) {
        bool keep = true;
        for (unsigned s = 0; s < stages; ++s) keep = entropy.next_bit() && keep;
        if (keep) out.edges.push_back(e);
    }
    return out;
}

/// Deterministic divider: keeps every n-th pulse (the 1st, n+1-th, ...).
/// Waiting times of an exponential input become Erlang(f, n).
inline PulseTrain divide_det(const PulseTrain& train, unsigned n) {
    if (n == 0) throw std::invalid_argument("divide_det: n >= 1");
    if (n == 1) return train;
    PulseTrain out{{}, train.width, train.horizon};
    for (std::size_t i = 0; i < train.edges.size(); i += n) out.edges.push_back(train.edges[i]);
    return out;
}

/// Toggle-flip-flop view of deterministic division by two: the output level
/// flips at every input pulse, so every edge of the result carries one
/// original pulse and the input train can be restored with edge_double.
inline LevelTrace divide_det2_level(const PulseTrain& train) {
    return LevelTrace{false, train.edges, train.horizon};
}

/// Divide-by-four: one DRFF whose data input is its own inverted output, clocked by
/// the input train. Divides rate by 4 as 2_R followed by 2_D.
/// Ports: CP (in), Q (out).
inline Netlist build_divider_2r2d() {
    Netlist nl;
    int cp = nl.add_net(), q = nl.add_net(), qbar = nl.add_net();
    nl.add("div", CompKind::DRFF, {qbar, cp}, {q, qbar});
    nl.add_port("CP", cp);
    nl.add_port("Q", q);
    return nl;
}

struct CounterState {
    std::uint32_t value;
};

/// Synchronous random counter: TRFF bit i toggles with probability 1/2 per
/// clock when all lower bits are 1 (bit 0 is always enabled). Returns the
/// state after each clock.
inline std::vector<CounterState> random_counter(unsigned width, std::size_t clocks, EntropySource& entropy) {
    if (width == 0 || width > 31) throw std::invalid_argument("random_counter: width in [1, 31]");
    std::vector<EntropySource> bit_streams;
    for (unsigned i = 0; i < width; ++i) bit_streams.push_back(entropy.fork("ctr" + std::to_string(i)));
    std::vector<CounterState> out;
    out.reserve(clocks);
    std::uint32_t state = 0;
    for (std::size_t c = 0; c < clocks; ++c) {
        std::uint32_t next = state;
        for (unsigned i = 0; i < width; ++i) {
            bool enabled = (state & ((1u << i) - 1)) == ((1u << i) - 1);
            bool b = bit_streams[i].next_bit();
            if (enabled && b) next ^= 1u << i;
        }
        state = next;
        out.push_back({state});
    }
    return out;
}

/// Same topology as a netlist of TRFFs with AND-gated toggle enables.
/// Ports: CP (in), Q0..Q{N-1} (out).
inline Netlist build_random_counter(unsigned width) {
    if (width == 0) throw std::invalid_argument("build_random_counter: width >= 1");
    Netlist nl;
    int cp = nl.add_net();
    int one = nl.add_net();
    nl.add("one", CompKind::CONST, {}, {one}, {.level = true});
    std::vector<int> q(width);
    for (unsigned i = 0; i < width; ++i) q[i] = nl.add_net();
    for (unsigned i = 0; i < width; ++i) {
        int enable = one;
        if (i == 1) enable = q[0];
        if (i > 1) {
            enable = nl.add_net();
            std::vector<int> lower(q.begin(), q.begin() + i);
            nl.add("en" + std::to_string(i), CompKind::AND, lower, {enable});
        }
        nl.add("ctr" + std::to_string(i), CompKind::TRFF, {enable, cp}, {q[i]});
    }
    nl.add_port("CP", cp);
    for (unsigned i = 0; i < width; ++i) nl.add_port("Q" + std::to_string(i), q[i]);
    return nl;
}

/// Multiplication factors mu = k/2^N reachable with N random flip-flops:
/// k = 2^a (2^b - 1) with a >= 0, b >= 1, a + b <= N. |set| = N(N+1)/2.
inline std::vector<std::uint64_t> mu_realizable_set(unsigned n_ff) {
    if (n_ff == 0 || n_ff > 63) throw std::invalid_argument("mu_realizable_set: N in [1, 63]");
    std::set<std::uint64_t> ks;
    for (unsigned b = 1; b <= n_ff; ++b)
        for (unsigned a = 0; a + b <= n_ff; ++a)
            ks.insert((std::uint64_t(1) << a) * ((std::uint64_t(1) << b) - 1));
    return {ks.begin(), ks.end()};
}

/// Random frequency multiplier by mu = 2^-m (1 - 2^-n): a pulse survives iff
/// it fails at least one of n halving stages and passes all m halving stages.
inline PulseTrain mu_multiplier(const PulseTrain& train, unsigned n, unsigned m, EntropySource& entropy) {
    if (n == 0) throw std::invalid_argument("mu_multiplier: n >= 1");
    PulseTrain out{{}, train.width, train.horizon};
    for (double e : train.edges) {
        bool all_n = true;
        for (unsigned i = 0; i < n; ++i) all_n = entropy.next_bit() && all_n;
        bool all_m = true;
        for (unsigned i = 0; i < m; ++i) all_m = entropy.next_bit() && all_m;
        if (!all_n && all_m) out.edges.push_back(e);
    }
    return out;
}

/// Switch settings of an N-stage lambda-multiplier. A pulse reaching stage i
/// exits there with probability 1/2; closed switch i passes it to the output
/// with weight 2^{N-i}. k = 2^N additionally closes the residual path, so
/// lambda = k/2^N covers [0, 1] inclusive.
struct LambdaFactor {
    unsigned stages;
    std::uint64_t k;

    LambdaFactor(unsigned n_stages, std::uint64_t k_val) : stages(n_stages), k(k_val) {
        if (n_stages == 0 || n_stages > 62) throw std::invalid_argument("LambdaFactor: N in [1, 62]");
        if (k > (std::uint64_t(1) << n_stages)) throw std::invalid_argument("LambdaFactor: k in [0, 2^N]");
    }

    double lambda() const { return double(k) / double(std::uint64_t(1) << stages); }

    bool switch_closed(unsigned i) const {   // i in [1, N]
        if (k == (std::uint64_t(1) << stages)) return true;
        return (k >> (stages - i)) & 1;
    }

    bool residual_closed() const { return k == (std::uint64_t(1) << stages); }
};

/// Decide survival of one pulse from its routing bits; consumes at most
/// `stages` bits (one per RPS the pulse traverses).
inline bool lambda_route_pulse(const LambdaFactor& lf, EntropySource& entropy) {
    for (unsigned i = 1; i <= lf.stages; ++i)
        if (entropy.next_bit()) return lf.switch_closed(i);
    return lf.residual_closed();
}

/// Per-pulse survival is Bernoulli(k/2^N) exactly; routing of distinct
/// pulses independent.
inline PulseTrain lambda_multiplier(const PulseTrain& train, const LambdaFactor& lf, EntropySource& entropy) {
    PulseTrain out{{}, train.width, train.horizon};
    for (double e : train.edges)
        if (lambda_route_pulse(lf, entropy)) out.edges.push_back(e);
    return out;
}

/// Structural lambda-multiplier: a cascade of N RPS stages; branch i goes
/// through a switch and N-i delay elements so every path has equal latency.
/// Ports: IN, OUT. Counts: N RPS (one DRFF each, plus 2 ordinary flip-flops),
/// N(N-1)/2 DLY (one ordinary flip-flop each).
/// Appends the RPS/SWITCH/DLY cascade of a lambda-multiplier to an existing
/// netlist, driven from `in`; component ids take `prefix`. Returns the output net.
inline int append_lambda_cascade(Netlist& nl, int in, const LambdaFactor& lf,
                                 const std::string& prefix, double latency = 0.0) {
    unsigned n = lf.stages;
    std::vector<int> branch_out;   // aligned branch outputs feeding the OR
    int chain = in;
    for (unsigned i = 1; i <= n; ++i) {
        int exit_net = nl.add_net();
        int cont = nl.add_net();
        nl.add(prefix + "rps" + std::to_string(i), CompKind::RPS, {chain}, {exit_net, cont},
               {.delay = latency});
        int sw_out = nl.add_net();
        nl.add(prefix + "sw" + std::to_string(i), CompKind::SWITCH, {exit_net}, {sw_out},
               {.closed = lf.switch_closed(i)});
        int aligned = sw_out;
        for (unsigned d = 0; d < n - i; ++d) {
            int next = nl.add_net();
            nl.add(prefix + "dly" + std::to_string(i) + "_" + std::to_string(d), CompKind::DLY,
                   {aligned}, {next}, {.delay = latency});
            aligned = next;
        }
        branch_out.push_back(aligned);
        chain = cont;
    }
    int res_out = nl.add_net();
    nl.add(prefix + "sw_res", CompKind::SWITCH, {chain}, {res_out}, {.closed = lf.residual_closed()});
    branch_out.push_back(res_out);
    int out = nl.add_net();
    nl.add(prefix + "sum", CompKind::OR, branch_out, {out});
    return out;
}

inline Netlist build_lambda_netlist(const LambdaFactor& lf, double latency = 0.0) {
    Netlist nl;
    int in = nl.add_net();
    int out = append_lambda_cascade(nl, in, lf, "", latency);
    nl.add_port("IN", in);
    nl.add_port("OUT", out);
    return nl;
}

struct LambdaResources {
    unsigned drff_class;
    unsigned ordinary_ff;
};

/// Resource count of the structural multiplier: N DRFF-class elements and
/// (N^2+3N)/2 ordinary flip-flops (2 per RPS, 1 per DLY).
inline LambdaResources lambda_resources(const Netlist& nl) {
    unsigned rps = 0, dly = 0;
    for (const Component& c : nl.components) {
        if (c.kind == CompKind::RPS) ++rps;
        if (c.kind == CompKind::DLY) ++dly;
    }
    return {rps, 2 * rps + dly};
}

/// Frequency synthesizer: exact sum of an RPT at f1 and a lambda-multiplied
/// RPT at f2 - f1. Mean output rate f1 + (k/2^N)(f2 - f1).
inline PulseTrain synthesize(RateHz f1, RateHz f2, const LambdaFactor& lf, EntropySource& entropy,
                             double width, double horizon) {
    if (!(f2.value > f1.value)) throw std::invalid_argument("synthesize: need f2 > f1");
    EntropySource s1 = entropy.fork("synth_base");
    EntropySource s2 = entropy.fork("synth_delta");
    EntropySource s3 = entropy.fork("synth_route");
    PulseTrain base = generate_rpt(s1, f1, width, horizon);
    PulseTrain delta = generate_rpt(s2, RateHz(f2.value - f1.value), width, horizon);
    PulseTrain scaled = lambda_multiplier(delta, lf, s3);
    // exact summation: merge all edges (XOR-parity circuit), then re-double
    std::vector<double> merged;
    merged.reserve(base.edges.size() + scaled.edges.size());
    std::merge(base.edges.begin(), base.edges.end(), scaled.edges.begin(), scaled.edges.end(),
               std::back_inserter(merged));
    LevelTrace parity{false, std::move(merged), horizon};
    return canonicalize(edge_double(parity, width));
}

} // namespace randpulse
