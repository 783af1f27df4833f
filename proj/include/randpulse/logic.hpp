// randpulse: event-driven gate/flip-flop netlist simulator.
//
// Component port conventions (net ids; -1 = unconnected optional input):
//   DFF/DRFF/PRFF : inputs [D, CP] or [D, CP, S, R]; outputs [Q] or [Q, QBAR]
//   TFF/TRFF      : inputs [T, CP] or [T, CP, S, R]; outputs [Q] or [Q, QBAR]
//   AND/OR/NOR/XOR: n >= 1 inputs, 1 output
//   NOT/BUF       : 1 input, 1 output (BUF has a transport delay)
//   CONST         : no inputs, 1 output held at `level`
//   RPS           : 1 input, outputs [OUT1, OUT2]; routes each pulse randomly
//   DLY           : 1 input, 1 output; fixed transport delay (= RPS latency)
//   SWITCH        : 1 input, 1 output; open blocks, closed passes
//   RPG           : no inputs, 1 output; random pulse train of rate f, width w
//
// All events at one timestamp are processed in delta cycles: every clocked
// element samples its inputs as of just-before the edge, then all outputs
// commit (plus t_p if nonzero). Asynchronous S/R override the clocked action.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "randpulse/entropy.hpp"
#include "randpulse/lfsr.hpp"
#include "randpulse/pulse_train.hpp"

namespace randpulse {

enum class CompKind {
    DFF, TFF, DRFF, TRFF, PRFF,
    AND, OR, NOR, XOR, NOT_GATE, BUF, CONST,
    RPS, DLY, SWITCH, RPG
};

inline bool is_clocked(CompKind k) {
    return k == CompKind::DFF || k == CompKind::TFF || k == CompKind::DRFF ||
           k == CompKind::TRFF || k == CompKind::PRFF;
}

inline bool is_random(CompKind k) {
    return k == CompKind::DRFF || k == CompKind::TRFF || k == CompKind::RPS || k == CompKind::RPG;
}

struct CompParams {
    unsigned lfsr_len = 8;            // PRFF
    std::vector<unsigned> taps;       // PRFF; empty = maximal-length default
    std::uint32_t lfsr_seed = 1;      // PRFF; all-zeros rejected
    double delay = 0.0;               // BUF / RPS / DLY
    bool level = false;               // CONST
    bool closed = true;               // SWITCH
    double f = 0.0, w = 0.0;          // RPG
    bool init_q = false;              // flip-flop initial state
    std::string entropy_stream;       // optional shared-stream label
};

struct Component {
    std::string id;
    CompKind kind;
    CompParams params;
    std::vector<int> inputs;
    std::vector<int> outputs;
};

/// Gate-level circuit. Every component input must be driven by exactly one
/// component output or an external port; combinational cycles are rejected.
struct Netlist {
    std::vector<Component> components;
    int net_count = 0;
    std::map<std::string, int> ports;

    int add_net() { return net_count++; }

    Component& add(std::string id, CompKind kind, std::vector<int> inputs, std::vector<int> outputs,
                   CompParams params = {}) {
        components.push_back({std::move(id), kind, std::move(params), std::move(inputs), std::move(outputs)});
        return components.back();
    }

    void add_port(const std::string& name, int net) { ports[name] = net; }

    int port(const std::string& name) const {
        auto it = ports.find(name);
        if (it == ports.end()) throw std::invalid_argument("no such port: " + name);
        return it->second;
    }

    void validate() const;
};

struct SimConfig {
    double horizon = 0.0;
    EntropySource entropy{0};
    double t_p = 0.0;                      // per-kind propagation delay of clocked outputs
    std::optional<std::set<int>> record;   // nets to record; nullopt = all
};

struct Trace {
    std::unordered_map<int, LevelTrace> nets;
    std::vector<std::string> warnings;

    const LevelTrace& at(int net) const {
        auto it = nets.find(net);
        if (it == nets.end()) throw std::out_of_range("net not recorded");
        return it->second;
    }
};

inline void Netlist::validate() const {
    std::vector<int> driver(std::size_t(net_count), -1);
    for (std::size_t c = 0; c < components.size(); ++c) {
        const Component& comp = components[c];
        for (int o : comp.outputs) {
            if (o < 0 || o >= net_count) throw std::invalid_argument(comp.id + ": output net out of range");
            if (driver[std::size_t(o)] != -1)
                throw std::invalid_argument(comp.id + ": net has multiple drivers");
            driver[std::size_t(o)] = int(c);
        }
        std::size_t min_in = 0, max_in = 0;
        switch (comp.kind) {
        case CompKind::DFF: case CompKind::TFF: case CompKind::DRFF:
        case CompKind::TRFF: case CompKind::PRFF: min_in = 2; max_in = 4; break;
        case CompKind::AND: case CompKind::OR: case CompKind::NOR: case CompKind::XOR:
            min_in = 1; max_in = std::size_t(-1); break;
        case CompKind::NOT_GATE: case CompKind::BUF: case CompKind::DLY:
        case CompKind::SWITCH: case CompKind::RPS: min_in = 1; max_in = 1; break;
        case CompKind::CONST: case CompKind::RPG: min_in = 0; max_in = 0; break;
        }
        if (comp.inputs.size() < min_in || comp.inputs.size() > max_in)
            throw std::invalid_argument(comp.id + ": bad input arity");
        if (comp.kind == CompKind::PRFF) {
            Lfsr probe(comp.params.lfsr_len,
                       comp.params.taps.empty() ? maximal_taps(comp.params.lfsr_len) : comp.params.taps,
                       comp.params.lfsr_seed);
        }
    }
    std::set<int> port_nets;
    for (const auto& [name, net] : ports) {
        if (net < 0 || net >= net_count) throw std::invalid_argument("port " + name + ": net out of range");
        port_nets.insert(net);
    }
    for (const Component& comp : components)
        for (int i : comp.inputs)
            if (i >= 0 && driver[std::size_t(i)] == -1 && !port_nets.count(i))
                throw std::invalid_argument(comp.id + ": input net " + std::to_string(i) + " has no driver");

    // combinational cycle check: DFS over zero-delay combinational edges
    std::vector<int> color(components.size(), 0);
    auto comb = [](const Component& c) {
        return c.kind == CompKind::AND || c.kind == CompKind::OR || c.kind == CompKind::NOR ||
               c.kind == CompKind::XOR || c.kind == CompKind::NOT_GATE || c.kind == CompKind::SWITCH ||
               (c.kind == CompKind::BUF && c.params.delay == 0.0);
    };
    std::vector<std::vector<int>> comb_fanout(static_cast<std::size_t>(net_count));
    for (std::size_t c = 0; c < components.size(); ++c)
        if (comb(components[c]))
            for (int i : components[c].inputs)
                if (i >= 0) comb_fanout[std::size_t(i)].push_back(int(c));
    std::function<void(int)> dfs = [&](int c) {
        color[std::size_t(c)] = 1;
        for (int o : components[std::size_t(c)].outputs)
            for (int next : comb_fanout[std::size_t(o)]) {
                if (color[std::size_t(next)] == 1)
                    throw std::invalid_argument("combinational cycle through " + components[std::size_t(next)].id);
                if (color[std::size_t(next)] == 0) dfs(next);
            }
        color[std::size_t(c)] = 2;
    };
    for (std::size_t c = 0; c < components.size(); ++c)
        if (comb(components[c]) && color[c] == 0) dfs(int(c));
}

namespace detail {

struct Event {
    double time;
    std::uint64_t seq;
    int net;
    bool level;
    bool operator>(const Event& o) const {
        return time != o.time ? time > o.time : seq > o.seq;
    }
};

} // namespace detail

class Simulator {
public:
    Simulator(const Netlist& nl, std::map<std::string, LevelTrace> stimuli, SimConfig cfg)
        : nl_(nl), cfg_(std::move(cfg)) {
        nl.validate();
        levels_.assign(std::size_t(nl.net_count), false);
        recorded_.resize(std::size_t(nl.net_count));
        fanout_.resize(std::size_t(nl.net_count));
        for (std::size_t c = 0; c < nl.components.size(); ++c)
            for (int i : nl.components[c].inputs)
                if (i >= 0) fanout_[std::size_t(i)].push_back(int(c));
        states_.resize(nl.components.size());
        for (std::size_t c = 0; c < nl.components.size(); ++c) {
            const Component& comp = nl.components[c];
            CompState& st = states_[c];
            if (is_clocked(comp.kind)) {
                st.q = comp.params.init_q;
                if (st.q) schedule(0.0, comp.outputs[0], true);
                if (comp.outputs.size() > 1 && !st.q) schedule(0.0, comp.outputs[1], true);
            }
            if (comp.kind == CompKind::PRFF)
                st.lfsr.emplace(comp.params.lfsr_len,
                                comp.params.taps.empty() ? maximal_taps(comp.params.lfsr_len) : comp.params.taps,
                                comp.params.lfsr_seed);
            if (is_random(comp.kind))
                st.stream.emplace(cfg_.entropy.fork(
                    comp.params.entropy_stream.empty() ? std::string_view(comp.id)
                                                       : std::string_view(comp.params.entropy_stream)));
            if (comp.kind == CompKind::CONST && comp.params.level)
                schedule(0.0, comp.outputs[0], true);
            if (comp.kind == CompKind::RPG) {
                st.rpg_next_rise = sample_exponential(*st.stream, RateHz(comp.params.f));
                rpg_comps_.push_back(int(c));
            }
        }
        for (auto& [name, trace] : stimuli) {
            int net = nl.port(name);
            StimCursor cur;
            cur.net = net;
            cur.trace = std::move(trace);
            if (cur.trace.initial_high) schedule(0.0, net, true);
            stim_.push_back(std::move(cur));
        }
    }

    Trace run() {
        const double T = cfg_.horizon;
        while (true) {
            double t = next_time();
            if (!(t < T)) break;
            int deltas = 0;
            for (;;) {
                auto batch = pop_batch(t);
                if (batch.empty()) break;
                if (++deltas > delta_limit_)
                    throw std::runtime_error("combinational oscillation at t=" + std::to_string(t));
                process_batch(t, batch);
            }
        }
        Trace out;
        out.warnings = std::move(warnings_);
        for (int n = 0; n < nl_.net_count; ++n) {
            if (cfg_.record && !cfg_.record->count(n)) continue;
            LevelTrace lt{false, {}, cfg_.horizon};
            auto& raw = recorded_[std::size_t(n)];
            std::size_t k = 0;
            // fold transitions at t=0 into the initial level
            while (k < raw.size() && raw[k] == 0.0) {
                lt.initial_high = !lt.initial_high;
                ++k;
            }
            // cancel zero-width delta glitches (equal-time transition pairs)
            for (std::size_t i = k; i < raw.size(); ++i) {
                if (!lt.transitions.empty() && lt.transitions.back() == raw[i])
                    lt.transitions.pop_back();
                else
                    lt.transitions.push_back(raw[i]);
            }
            out.nets.emplace(n, std::move(lt));
        }
        return out;
    }

private:
    struct CompState {
        bool q = false;
        std::optional<Lfsr> lfsr;
        std::optional<EntropySource> stream;
        double rpg_next_rise = -1.0, rpg_next_fall = -1.0;
        int rps_route = 0;
    };

    struct StimCursor {
        int net = -1;
        LevelTrace trace;
        std::size_t pos = 0;
    };

    void schedule(double t, int net, bool level) {
        queue_.push({t, seq_++, net, level});
    }

    double next_time() const {
        double t = std::numeric_limits<double>::infinity();
        if (!queue_.empty()) t = std::min(t, queue_.top().time);
        for (const StimCursor& s : stim_)
            if (s.pos < s.trace.transitions.size()) t = std::min(t, s.trace.transitions[s.pos]);
        for (int c : rpg_comps_) {
            const CompState& st = states_[std::size_t(c)];
            if (st.rpg_next_fall >= 0.0) t = std::min(t, st.rpg_next_fall);
            if (st.rpg_next_rise >= 0.0) t = std::min(t, st.rpg_next_rise);
        }
        return t;
    }

    // All pending net changes at exactly time t, one delta's worth.
    std::vector<std::pair<int, bool>> pop_batch(double t) {
        std::vector<std::pair<int, bool>> batch;
        while (!queue_.empty() && queue_.top().time == t) {
            batch.emplace_back(queue_.top().net, queue_.top().level);
            queue_.pop();
        }
        for (StimCursor& s : stim_)
            while (s.pos < s.trace.transitions.size() && s.trace.transitions[s.pos] == t) {
                batch.emplace_back(s.net, !level_of_stim(s));
                ++s.pos;
            }
        for (int c : rpg_comps_) {
            CompState& st = states_[std::size_t(c)];
            const Component& comp = nl_.components[std::size_t(c)];
            if (st.rpg_next_rise == t) {
                batch.emplace_back(comp.outputs[0], true);
                st.rpg_next_fall = t + comp.params.w;
                st.rpg_next_rise = -1.0;
            }
            if (st.rpg_next_fall == t) {
                batch.emplace_back(comp.outputs[0], false);
                st.rpg_next_fall = -1.0;
                double next = t;
                do {
                    next += sample_exponential(*st.stream, RateHz(comp.params.f));
                } while (next <= t);   // output must return LOW before the next pulse
                st.rpg_next_rise = next;
            }
        }
        return batch;
    }

    bool level_of_stim(const StimCursor& s) const {
        return s.trace.initial_high ^ (s.pos & 1);
    }

    void process_batch(double t, const std::vector<std::pair<int, bool>>& batch) {
        // net -> new level, last write wins inside one delta
        std::vector<std::pair<int, bool>> changes;
        for (auto [net, level] : batch) {
            bool found = false;
            for (auto& ch : changes)
                if (ch.first == net) { ch.second = level; found = true; }
            if (!found) changes.emplace_back(net, level);
        }
        std::erase_if(changes, [&](const auto& ch) { return levels_[std::size_t(ch.first)] == ch.second; });
        if (changes.empty()) return;

        // phase 1: clocked elements whose CP rises in this delta sample
        // D/T/S/R as of just-before the edge
        for (auto [net, level] : changes) {
            if (!level) continue;
            for (int c : fanout_[std::size_t(net)]) {
                const Component& comp = nl_.components[std::size_t(c)];
                if (is_clocked(comp.kind) && comp.inputs[1] == net)
                    clock_edge(t, int(c));
            }
        }

        // phase 2: commit the changes
        for (auto [net, level] : changes) {
            levels_[std::size_t(net)] = level;
            record(net, t);
        }

        // phase 3: combinational fanout, async S/R, pulse transports
        for (auto [net, level] : changes) {
            for (int c : fanout_[std::size_t(net)]) {
                const Component& comp = nl_.components[std::size_t(c)];
                CompState& st = states_[std::size_t(c)];
                switch (comp.kind) {
                case CompKind::AND: case CompKind::OR: case CompKind::NOR:
                case CompKind::XOR: case CompKind::NOT_GATE:
                    drive(t, comp.outputs[0], gate_value(comp));
                    break;
                case CompKind::BUF:
                    schedule(t + comp.params.delay, comp.outputs[0], in(comp, 0));
                    break;
                case CompKind::SWITCH:
                    drive(t, comp.outputs[0], comp.params.closed && in(comp, 0));
                    break;
                case CompKind::DLY:
                    schedule(t + comp.params.delay, comp.outputs[0], in(comp, 0));
                    break;
                case CompKind::RPS:
                    if (comp.inputs[0] == net) {
                        if (level) st.rps_route = st.stream->next_bit() ? 0 : 1;
                        schedule(t + comp.params.delay, comp.outputs[std::size_t(st.rps_route)], level);
                    }
                    break;
                default:
                    if (is_clocked(comp.kind) && comp.inputs.size() >= 3 &&
                        (comp.inputs[2] == net || (comp.inputs.size() >= 4 && comp.inputs[3] == net)))
                        async_set_reset(t, int(c));
                    break;
                }
            }
        }
    }

    bool in(const Component& comp, std::size_t k) const {
        int net = comp.inputs[k];
        return net >= 0 && levels_[std::size_t(net)];
    }

    bool gate_value(const Component& comp) const {
        bool v;
        switch (comp.kind) {
        case CompKind::AND:
            v = true;
            for (std::size_t k = 0; k < comp.inputs.size(); ++k) v = v && in(comp, k);
            return v;
        case CompKind::OR: case CompKind::NOR:
            v = false;
            for (std::size_t k = 0; k < comp.inputs.size(); ++k) v = v || in(comp, k);
            return comp.kind == CompKind::NOR ? !v : v;
        case CompKind::XOR:
            v = false;
            for (std::size_t k = 0; k < comp.inputs.size(); ++k) v = v ^ in(comp, k);
            return v;
        case CompKind::NOT_GATE:
            return !in(comp, 0);
        default:
            throw std::logic_error("gate_value on non-gate");
        }
    }

    void drive(double t, int net, bool level) {
        if (levels_[std::size_t(net)] != level) schedule(t, net, level);
    }

    void clock_edge(double t, int c) {
        const Component& comp = nl_.components[std::size_t(c)];
        CompState& st = states_[std::size_t(c)];
        bool s = comp.inputs.size() >= 3 && in(comp, 2);
        bool r = comp.inputs.size() >= 4 && in(comp, 3);
        bool next = st.q;
        // every random flip-flop draws one bit per clock edge from its own
        // stream, so stream positions stay aligned across shared streams
        bool b = true;
        if (comp.kind == CompKind::DRFF || comp.kind == CompKind::TRFF) b = st.stream->next_bit();
        if (comp.kind == CompKind::PRFF) b = st.lfsr->step();
        if (s && r) warnings_.push_back(comp.id + ": S and R both asserted; S wins");
        if (s) next = true;
        else if (r) next = false;
        else {
            switch (comp.kind) {
            case CompKind::DFF:  next = in(comp, 0); break;
            case CompKind::DRFF: case CompKind::PRFF: next = b ? in(comp, 0) : st.q; break;
            case CompKind::TFF:  next = in(comp, 0) ? !st.q : st.q; break;
            case CompKind::TRFF: next = (in(comp, 0) && b) ? !st.q : st.q; break;
            default: break;
            }
        }
        commit_q(t, c, next);
    }

    void async_set_reset(double t, int c) {
        const Component& comp = nl_.components[std::size_t(c)];
        CompState& st = states_[std::size_t(c)];
        bool s = in(comp, 2);
        bool r = comp.inputs.size() >= 4 && in(comp, 3);
        if (s && r) warnings_.push_back(comp.id + ": S and R both asserted; S wins");
        if (s) commit_q(t, c, true);
        else if (r) commit_q(t, c, false);
    }

    void commit_q(double t, int c, bool next) {
        const Component& comp = nl_.components[std::size_t(c)];
        CompState& st = states_[std::size_t(c)];
        if (next == st.q) return;
        st.q = next;
        schedule(t + cfg_.t_p, comp.outputs[0], next);
        if (comp.outputs.size() > 1) schedule(t + cfg_.t_p, comp.outputs[1], !next);
    }

    void record(int net, double t) {
        if (cfg_.record && !cfg_.record->count(net)) return;
        if (recorded_.size() < std::size_t(nl_.net_count)) recorded_.resize(std::size_t(nl_.net_count));
        recorded_[std::size_t(net)].push_back(t);
    }

    const Netlist& nl_;
    SimConfig cfg_;
    std::vector<bool> levels_;
    std::vector<std::vector<int>> fanout_;
    std::vector<CompState> states_;
    std::vector<StimCursor> stim_;
    std::vector<int> rpg_comps_;
    std::priority_queue<detail::Event, std::vector<detail::Event>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    std::vector<std::vector<double>> recorded_;
    std::vector<std::string> warnings_;
    static constexpr int delta_limit_ = 10000;
};

inline Trace simulate(const Netlist& nl, std::map<std::string, LevelTrace> stimuli, SimConfig cfg) {
    return Simulator(nl, std::move(stimuli), std::move(cfg)).run();
}

/// Periodic clock of frequency f with 50% duty cycle, first rising edge at 1/(2f).
inline LevelTrace make_clock(double f, double horizon) {
    LevelTrace lt{false, {}, horizon};
    double half = 0.5 / f;
    lt.transitions.reserve(std::size_t(2.0 * f * horizon) + 2);
    for (double t = half; t < horizon; t += half) lt.transitions.push_back(t);
    return lt;
}

/// Rising-edge times of a trace.
inline std::vector<double> rising_edges(const LevelTrace& lt) {
    std::vector<double> out;
    bool level = lt.initial_high;
    for (double t : lt.transitions) {
        level = !level;
        if (level) out.push_back(t);
    }
    return out;
}

/// Sample a net just after each clock edge (post-commit levels).
inline std::vector<bool> sample_at(const LevelTrace& net, const std::vector<double>& times) {
    std::vector<bool> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(net.level_at(t));
    return out;
}

/// Canonical RFF realization: RPG-driven toggle flip-flop sampled by a DFF on the
/// external clock. Ports: CP (in), Q (out).
inline Netlist build_drff_from_rpg(RateHz f_rpg, double rpg_width) {
    Netlist nl;
    int cp = nl.add_net(), rpg = nl.add_net(), one = nl.add_net();
    int q1 = nl.add_net(), q2 = nl.add_net();
    nl.add("one", CompKind::CONST, {}, {one}, {.level = true});
    nl.add("rpg", CompKind::RPG, {}, {rpg}, {.f = f_rpg.value, .w = rpg_width});
    nl.add("ff1", CompKind::TFF, {one, rpg}, {q1});
    nl.add("ff2", CompKind::DFF, {q1, cp}, {q2});
    nl.add_port("CP", cp);
    nl.add_port("Q", q2);
    return nl;
}

} // namespace randpulse
