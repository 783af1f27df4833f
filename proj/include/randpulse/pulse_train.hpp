// randpulse: random pulse trains and continuous-time interval operations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "randpulse/entropy.hpp"
#include "randpulse/stats.hpp"

namespace randpulse {

/// A random pulse train: rising-edge timestamps of equal-width logic pulses.
///
/// Canonical form requires strictly increasing edges in [0, T), with
/// successive edges separated by more than the pulse width (physically
/// overlapping pulses on one line merge into one).
struct PulseTrain {
    std::vector<double> edges;
    double width = 0.0;
    double horizon = 0.0;

    std::size_t count() const { return edges.size(); }
};

/// Two-level waveform: an initial level plus strictly increasing transition times.
struct LevelTrace {
    bool initial_high = false;
    std::vector<double> transitions;
    double horizon = 0.0;

    bool level_at(double t) const {
        auto it = std::upper_bound(transitions.begin(), transitions.end(), t);
        std::size_t flips = std::size_t(it - transitions.begin());
        return initial_high ^ (flips & 1);
    }
};

struct DistributionCheck {
    double statistic = 0.0;
    double p_value = 0.0;
    std::size_t n = 0;
};

inline bool is_canonical(const PulseTrain& t) {
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
        if (t.edges[i] < 0.0 || t.edges[i] >= t.horizon) return false;
        if (i > 0 && t.edges[i] - t.edges[i - 1] <= t.width) return false;
    }
    return true;
}

/// Merge pulses that overlap within one train: any edge arriving within
/// the width of the previous retained edge is dropped. Idempotent.
inline PulseTrain canonicalize(const PulseTrain& t) {
    PulseTrain out{{}, t.width, t.horizon};
    out.edges.reserve(t.edges.size());
    for (double e : t.edges) {
        if (e < 0.0 || e >= t.horizon) continue;
        if (out.edges.empty() || e - out.edges.back() > t.width) out.edges.push_back(e);
    }
    return out;
}

inline double mean_frequency(const PulseTrain& t) {
    if (!(t.horizon > 0.0)) throw std::invalid_argument("mean_frequency: horizon must be > 0");
    return double(t.edges.size()) / t.horizon;
}

inline std::vector<double> waiting_times(const PulseTrain& t) {
    std::vector<double> w;
    if (t.edges.size() < 2) return w;
    w.reserve(t.edges.size() - 1);
    for (std::size_t i = 1; i < t.edges.size(); ++i) w.push_back(t.edges[i] - t.edges[i - 1]);
    return w;
}

/// Erlang density f^n t^{n-1} e^{-ft} / (n-1)!  — waiting time of every
/// n-th event of a rate-f Poisson process; n=1 is the exponential density.
inline double erlang_pdf(double t, RateHz f, unsigned n) {
    if (n == 0) throw std::invalid_argument("erlang_pdf: n >= 1");
    if (t < 0.0) throw std::invalid_argument("erlang_pdf: t >= 0");
    if (t == 0.0) return n == 1 ? f.value : 0.0;
    double logp = double(n) * std::log(f.value) + double(n - 1) * std::log(t) - f.value * t - std::lgamma(double(n));
    return std::exp(logp);
}

struct ExponentialModel { double f; };
struct ErlangModel { double f; unsigned n; };

inline DistributionCheck ks_check(const std::vector<double>& samples, ExponentialModel m) {
    if (samples.size() < 100) throw std::invalid_argument("ks_check: need >= 100 samples");
    auto r = stats::ks_test(samples, [m](double t) { return stats::exponential_cdf(t, m.f); });
    return {r.statistic, r.p_value, r.n};
}

inline DistributionCheck ks_check(const std::vector<double>& samples, ErlangModel m) {
    if (samples.size() < 100) throw std::invalid_argument("ks_check: need >= 100 samples");
    auto r = stats::ks_test(samples, [m](double t) { return stats::erlang_cdf(t, m.f, m.n); });
    return {r.statistic, r.p_value, r.n};
}

/// Homogeneous Poisson pulse train of rate f on [0, T), canonical.
inline PulseTrain generate_rpt(EntropySource& src, RateHz f, double width, double horizon) {
    if (width < 0.0 || horizon < 0.0) throw std::invalid_argument("generate_rpt: w, T >= 0");
    if (width >= 1.0 / f.value) throw std::invalid_argument("generate_rpt: degenerate duty cycle w >= 1/f");
    PulseTrain out{{}, width, horizon};
    out.edges.reserve(std::size_t(f.value * horizon * 1.01) + 16);
    double t = 0.0;
    while (true) {
        t += sample_exponential(src, f);
        if (t >= horizon) break;
        if (out.edges.empty() || t - out.edges.back() > width) out.edges.push_back(t);
    }
    return out;
}

/// Coincidence (AND) of two trains: one output edge at the start of each
/// maximal overlap of [t, t+w_a+g) with [t, t+w_b+g); output width min(w_a, w_b).
inline PulseTrain and_overlap(const PulseTrain& a, const PulseTrain& b, double g = 0.0) {
    if (a.horizon != b.horizon) throw std::invalid_argument("and_overlap: horizon mismatch");
    const double wa = a.width + g, wb = b.width + g;
    PulseTrain out{{}, std::min(a.width, b.width), a.horizon};
    // every overlapping (a, b) pair contributes its overlap start; one a pulse
    // can overlap several b pulses (and vice versa) when g widens the windows
    std::size_t j0 = 0;
    for (double sa : a.edges) {
        while (j0 < b.edges.size() && b.edges[j0] + wb <= sa) ++j0;
        for (std::size_t j = j0; j < b.edges.size() && b.edges[j] < sa + wa; ++j) {
            double lo = std::max(sa, b.edges[j]);
            if (lo < out.horizon) out.edges.push_back(lo);
        }
    }
    std::sort(out.edges.begin(), out.edges.end());
    return canonicalize(out);
}

/// Union (OR) of two trains: overlapping pulses across trains merge;
/// output edge at the start of each merged interval, width max(w_a, w_b).
inline PulseTrain or_union(const PulseTrain& a, const PulseTrain& b) {
    if (a.horizon != b.horizon) throw std::invalid_argument("or_union: horizon mismatch");
    struct Iv { double s, e; };
    std::vector<Iv> ivs;
    ivs.reserve(a.edges.size() + b.edges.size());
    std::size_t i = 0, j = 0;
    while (i < a.edges.size() || j < b.edges.size()) {
        bool ta = j >= b.edges.size() || (i < a.edges.size() && a.edges[i] <= b.edges[j]);
        if (ta) { ivs.push_back({a.edges[i], a.edges[i] + a.width}); ++i; }
        else    { ivs.push_back({b.edges[j], b.edges[j] + b.width}); ++j; }
    }
    PulseTrain out{{}, std::max(a.width, b.width), a.horizon};
    double cur_end = -1.0;
    for (const Iv& iv : ivs) {
        if (out.edges.empty() || iv.s > cur_end) {
            out.edges.push_back(iv.s);
            cur_end = iv.e;
        } else {
            cur_end = std::max(cur_end, iv.e);
        }
    }
    return canonicalize(out);
}

/// Deterministic multiplier by two: one short pulse at every transition
/// (rising or falling) of the input signal. Pulse width = buffer delay.
inline PulseTrain edge_double(const LevelTrace& signal, double pulse_width) {
    PulseTrain out{{}, pulse_width, signal.horizon};
    out.edges.reserve(signal.transitions.size());
    for (double t : signal.transitions)
        if (t >= 0.0 && t < signal.horizon) out.edges.push_back(t);
    return out;
}

/// Pulse view -> level view: HIGH during [edge, edge+width).
inline LevelTrace to_level(const PulseTrain& t) {
    LevelTrace out{false, {}, t.horizon};
    out.transitions.reserve(2 * t.edges.size());
    for (double e : t.edges) {
        out.transitions.push_back(e);
        double fall = e + t.width;
        if (fall < t.horizon) out.transitions.push_back(fall);
    }
    return out;
}

/// Level view -> pulse view: one pulse per LOW->HIGH transition.
inline PulseTrain from_level(const LevelTrace& tr, double width) {
    PulseTrain out{{}, width, tr.horizon};
    bool level = tr.initial_high;
    for (double t : tr.transitions) {
        level = !level;
        if (level && t < tr.horizon) out.edges.push_back(t);
    }
    return canonicalize(out);
}

// --- serialization: one timestamp per line, header "# w=<s> T=<s>" ---

inline void save_train(std::ostream& os, const PulseTrain& t) {
    os.precision(17);
    os << "# w=" << t.width << " T=" << t.horizon << "\n";
    for (double e : t.edges) os << e << "\n";
}

inline void save_train(const std::string& path, const PulseTrain& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    save_train(os, t);
}

inline PulseTrain load_train(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("# w=", 0) != 0)
        throw std::runtime_error("pulse train: missing '# w=<s> T=<s>' header");
    PulseTrain t;
    {
        std::istringstream hs(header.substr(4));
        std::string ttok;
        hs >> t.width >> ttok;
        if (ttok.rfind("T=", 0) != 0) throw std::runtime_error("pulse train: bad header");
        t.horizon = std::strtod(ttok.c_str() + 2, nullptr);
    }
    double e;
    while (is >> e) t.edges.push_back(e);
    if (!is_canonical(t)) throw std::runtime_error("pulse train: file not canonical");
    return t;
}

inline PulseTrain load_train(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load_train(is);
}

} // namespace randpulse
