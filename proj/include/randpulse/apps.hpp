// randpulse: application circuits — stream RNG, binary noisy channel,
// dice thrower, and the randomness test battery.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "randpulse/entropy.hpp"
#include "randpulse/freq_ops.hpp"
#include "randpulse/logic.hpp"
#include "randpulse/stats.hpp"

namespace randpulse {

struct BitBlock {
    std::vector<std::uint8_t> bits;   // {0,1}
    std::string origin;
};

/// Bit-stream generator: one fresh random bit per clock. The DRFF realization feeds the
/// inverted output back to D; the TRFF realization holds T high. Both toggle
/// with probability 1/2, so successive output levels are i.i.d. fair bits.
inline BitBlock stream_rng(std::size_t n_bits, EntropySource& entropy) {
    if (n_bits == 0) throw std::invalid_argument("stream_rng: n >= 1");
    BitBlock out;
    out.origin = "stream_rng";
    out.bits.reserve(n_bits);
    bool q = false;
    for (std::size_t i = 0; i < n_bits; ++i) {
        if (entropy.next_bit()) q = !q;
        out.bits.push_back(q ? 1 : 0);
    }
    return out;
}

/// The bit-stream generator as a netlist, either realization. Ports: CP (in), DATA (out);
/// the Strobe is the clock itself in this ideal model.
inline Netlist build_stream_rng(bool use_trff) {
    Netlist nl;
    int cp = nl.add_net(), q = nl.add_net();
    if (use_trff) {
        int one = nl.add_net();
        nl.add("one", CompKind::CONST, {}, {one}, {.level = true});
        nl.add("rng", CompKind::TRFF, {one, cp}, {q}, {.entropy_stream = "rng_bits"});
    } else {
        int qbar = nl.add_net();
        nl.add("rng", CompKind::DRFF, {qbar, cp}, {q, qbar}, {.entropy_stream = "rng_bits"});
    }
    nl.add_port("CP", cp);
    nl.add_port("DATA", q);
    return nl;
}

/// Independent bit generators sampled per clock, one word per clock.
inline std::vector<std::uint64_t> parallel_rng(unsigned width, std::size_t n_words,
                                               EntropySource& entropy) {
    if (width == 0 || width > 64) throw std::invalid_argument("parallel_rng: width in [1, 64]");
    std::vector<EntropySource> lanes;
    std::vector<bool> q(width, false);
    for (unsigned b = 0; b < width; ++b) lanes.push_back(entropy.fork("lane" + std::to_string(b)));
    std::vector<std::uint64_t> words;
    words.reserve(n_words);
    for (std::size_t i = 0; i < n_words; ++i) {
        std::uint64_t word = 0;
        for (unsigned b = 0; b < width; ++b) {
            if (lanes[b].next_bit()) q[b] = !q[b];
            if (q[b]) word |= std::uint64_t(1) << b;
        }
        words.push_back(word);
    }
    return words;
}

/// Symmetric binary channel parameters: p_err = k/2^N, strictly below 1/2.
struct ChannelSpec {
    unsigned n_bits;
    std::uint64_t k;

    ChannelSpec(unsigned n, std::uint64_t k_val) : n_bits(n), k(k_val) {
        if (n == 0 || n > 62) throw std::invalid_argument("ChannelSpec: N in [1, 62]");
        if (k >= (std::uint64_t(1) << (n - 1)))
            throw std::invalid_argument("ChannelSpec: p_err must be < 0.5");
    }

    double p_err() const { return double(k) / double(std::uint64_t(1) << n_bits); }
};

/// Noisy channel: each data bit is XOR-ed with a flip bit that is 1 with
/// probability exactly k/2^N.
inline BitBlock noisy_channel(const BitBlock& data, const ChannelSpec& spec, EntropySource& entropy) {
    BitBlock out;
    out.origin = data.origin + "+channel";
    out.bits.reserve(data.bits.size());
    LambdaFactor lf(spec.n_bits, spec.k);
    for (std::uint8_t b : data.bits) {
        bool flip = lambda_route_pulse(lf, entropy);
        out.bits.push_back(std::uint8_t(b ^ (flip ? 1 : 0)));
    }
    return out;
}

/// Noisy channel, structural form: the flip stream and the data bit are
/// synchronized through a pair of DFFs clocked by the Strobe, then XOR-ed.
/// Ports: STROBE, DIN, FLIP (in), DOUT (out). DOUT lags DIN by one strobe.
inline Netlist build_noisy_channel() {
    Netlist nl;
    int strobe = nl.add_net(), din = nl.add_net(), flip = nl.add_net();
    int d_sync = nl.add_net(), f_sync = nl.add_net(), dout = nl.add_net();
    nl.add("sync_d", CompKind::DFF, {din, strobe}, {d_sync});
    nl.add("sync_f", CompKind::DFF, {flip, strobe}, {f_sync});
    nl.add("mix", CompKind::XOR, {d_sync, f_sync}, {dout});
    nl.add_port("STROBE", strobe);
    nl.add_port("DIN", din);
    nl.add_port("FLIP", flip);
    nl.add_port("DOUT", dout);
    return nl;
}

struct DiceRecord {
    unsigned value;       // in [1, 6]
    unsigned draws_used;  // 3-bit draws until acceptance
};

/// Dice throw: draw 3 random bits; redraw on 0 or 7. Geometric with accept
/// probability 3/4, so the mean number of draws is 4/3.
inline DiceRecord dice_throw(EntropySource& entropy, unsigned fuel = 10000) {
    for (unsigned attempt = 1; attempt <= fuel; ++attempt) {
        unsigned v = 0;
        for (int b = 0; b < 3; ++b) v = (v << 1) | unsigned(entropy.next_bit());
        if (v >= 1 && v <= 6) return {v, attempt};
    }
    throw std::runtime_error("dice_throw: fuel exhausted (entropy source broken?)");
}

struct BatteryTest {
    std::string name;
    double statistic;
    double p_value;
    bool pass;
};

struct BatteryReport {
    std::vector<BatteryTest> tests;
    double alpha;
    bool all_pass;
};

/// Bias z-score, serial correlation at lags 1..16, chi-square on 4-bit
/// blocks, and a runs test; each at the given alpha. The per-test alpha is
/// not family-wise corrected — callers judging many seeds should allow the
/// expected false-alarm fraction.
inline BatteryReport randomness_battery(const BitBlock& block, double alpha = 0.01) {
    const auto& bits = block.bits;
    const std::size_t n = bits.size();
    if (n < 10000) throw std::invalid_argument("randomness_battery: need >= 10^4 bits");
    BatteryReport report;
    report.alpha = alpha;

    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    double z = (double(ones) - 0.5 * double(n)) / std::sqrt(0.25 * double(n));
    double p_bias = 2.0 * (1.0 - stats::normal_cdf(std::fabs(z)));
    report.tests.push_back({"bias", z, p_bias, p_bias >= alpha});

    for (std::size_t lag = 1; lag <= 16; ++lag) {
        // lag-k serial correlation of +-1 values; z ~ N(0,1) under i.i.d.
        double sum = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            sum += (bits[i] ? 1.0 : -1.0) * (bits[i + lag] ? 1.0 : -1.0);
        double m = double(n - lag);
        double zl = sum / std::sqrt(m);
        double p = 2.0 * (1.0 - stats::normal_cdf(std::fabs(zl)));
        report.tests.push_back({"serial_lag" + std::to_string(lag), zl, p, p >= alpha});
    }

    {
        std::vector<double> observed(16, 0.0), expected(16, double(n / 4) / 16.0);
        for (std::size_t i = 0; i + 4 <= (n / 4) * 4; i += 4) {
            unsigned v = unsigned(bits[i]) << 3 | unsigned(bits[i + 1]) << 2 |
                         unsigned(bits[i + 2]) << 1 | unsigned(bits[i + 3]);
            observed[v] += 1.0;
        }
        auto r = stats::chi2_gof(observed, expected);
        report.tests.push_back({"chi2_4bit", r.statistic, r.p_value, r.p_value >= alpha});
    }

    {
        // Wald-Wolfowitz runs test conditioned on the observed ones count
        std::size_t runs = n ? 1 : 0;
        for (std::size_t i = 1; i < n; ++i) runs += bits[i] != bits[i - 1];
        double n1 = double(ones), n0 = double(n - ones);
        double mu = 2.0 * n0 * n1 / double(n) + 1.0;
        double var = (mu - 1.0) * (mu - 2.0) / (double(n) - 1.0);
        double zr = var > 0.0 ? (double(runs) - mu) / std::sqrt(var) : 0.0;
        double p = 2.0 * (1.0 - stats::normal_cdf(std::fabs(zr)));
        report.tests.push_back({"runs", zr, p, p >= alpha});
    }

    report.all_pass = true;
    for (const auto& t : report.tests) report.all_pass = report.all_pass && t.pass;
    return report;
}

// --- BitBlock I/O: raw binary file or ASCII 0/1 lines ---

inline void save_bits_ascii(const std::string& path, const BitBlock& block) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    for (auto b : block.bits) os << int(b) << "\n";
}

inline void save_bits_raw(const std::string& path, const BitBlock& block) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    std::uint8_t acc = 0;
    int fill = 0;
    for (auto b : block.bits) {
        acc = std::uint8_t(acc << 1 | b);
        if (++fill == 8) {
            os.put(char(acc));
            acc = 0;
            fill = 0;
        }
    }
    if (fill) os.put(char(acc << (8 - fill)));
}

inline BitBlock load_bits_ascii(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    BitBlock out;
    out.origin = path;
    int v;
    while (is >> v) {
        if (v != 0 && v != 1) throw std::runtime_error(path + ": bits must be 0 or 1");
        out.bits.push_back(std::uint8_t(v));
    }
    return out;
}

} // namespace randpulse
