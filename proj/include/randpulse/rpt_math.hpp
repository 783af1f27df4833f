// randpulse: stochastic arithmetic on RPT frequencies — AND multiplication,
// OR approximate sum/subtraction, exact XOR summation, and a small
// expression-to-circuit compiler with per-node scale tracking.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "randpulse/entropy.hpp"
#include "randpulse/freq_ops.hpp"
#include "randpulse/pulse_train.hpp"

namespace randpulse {

/// A numeric value in [0,1] carried as an RPT plus the Hz-per-unit scale.
struct RptValue {
    PulseTrain train;
    double scale;   // Hz per unit value

    double value() const { return mean_frequency(train) / scale; }
};

/// Mean coincidence rate of two independent RPTs seen through an
/// AND gate with setup correction g.
inline double coincidence_rate(double f1, double f2, double w1, double w2, double g = 0.0) {
    if (f1 < 0 || f2 < 0 || w1 < 0 || w2 < 0 || g < 0)
        throw std::invalid_argument("coincidence_rate: nonnegative arguments");
    return (w1 + w2 + g) * f1 * f2;
}

/// n-fold generalization at g=0: sum over i of f_i * prod_{j!=i} (f_j w_j).
inline double coincidence_rate_n(const std::vector<double>& f, const std::vector<double>& w) {
    if (f.size() != w.size() || f.size() < 2) throw std::invalid_argument("coincidence_rate_n");
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double term = f[i];
        for (std::size_t j = 0; j < f.size(); ++j)
            if (j != i) term *= f[j] * w[j];
        total += term;
    }
    return total;
}

/// Exact n-ary coincidence train: one edge at the start of each maximal
/// interval where all inputs are simultaneously active.
inline PulseTrain and_overlap_n(const std::vector<PulseTrain>& trains) {
    if (trains.empty()) throw std::invalid_argument("and_overlap_n: need >= 1 train");
    struct Iv { double s, e; };
    std::vector<Iv> acc;
    for (double t : trains[0].edges) acc.push_back({t, t + trains[0].width});
    for (std::size_t k = 1; k < trains.size(); ++k) {
        if (trains[k].horizon != trains[0].horizon)
            throw std::invalid_argument("and_overlap_n: horizon mismatch");
        std::vector<Iv> next;
        std::size_t i = 0, j = 0;
        const auto& ed = trains[k].edges;
        const double w = trains[k].width;
        while (i < acc.size() && j < ed.size()) {
            double lo = std::max(acc[i].s, ed[j]);
            double hi = std::min(acc[i].e, ed[j] + w);
            if (lo < hi) next.push_back({lo, hi});
            if (acc[i].e <= ed[j] + w) ++i; else ++j;
        }
        acc = std::move(next);
    }
    double wmin = trains[0].width;
    for (const auto& t : trains) wmin = std::min(wmin, t.width);
    PulseTrain out{{}, wmin, trains[0].horizon};
    for (const Iv& iv : acc)
        if (iv.s < out.horizon) out.edges.push_back(iv.s);
    return canonicalize(out);
}

/// Exact multiplication of two frequencies through an AND gate.
inline RptValue multiply(const RptValue& a, const RptValue& b, double g = 0.0) {
    return {and_overlap(a.train, b.train, g),
            (a.train.width + b.train.width + g) * a.scale * b.scale};
}

/// Approximate summation through an OR gate. The result never
/// exceeds the exact sum; the deficit is the cross-train overlap rate.
inline RptValue sum_approx(const RptValue& a, const RptValue& b) {
    if (a.scale != b.scale) throw std::invalid_argument("sum_approx: scale mismatch");
    return {or_union(a.train, b.train), a.scale};
}

struct SubResult {
    double dip_rate;     // negative-going dips per second at the OR output
    double value;        // dip_rate / scale; empirical, no identity asserted
    double stderr_est;
    std::size_t dips;
};

/// Subtraction built literally: OR with the b input inverted. The output sits
/// HIGH except where b is active and a is not; we count those dips. The
/// arithmetic meaning is characterized empirically, not asserted.
inline SubResult sub_approx(const RptValue& a, const RptValue& b) {
    if (a.scale != b.scale) throw std::invalid_argument("sub_approx: scale mismatch");
    // dips = intervals of b-activity with no a-activity; subtract coincidences
    std::size_t dips = 0;
    std::size_t i = 0;
    const double wa = a.train.width, wb = b.train.width;
    for (double tb : b.train.edges) {
        while (i < a.train.edges.size() && a.train.edges[i] + wa <= tb) ++i;
        bool covered = i < a.train.edges.size() && a.train.edges[i] < tb + wb;
        if (!covered) ++dips;
    }
    double T = b.train.horizon;
    double rate = double(dips) / T;
    return {rate, rate / a.scale, std::sqrt(double(dips)) / T / a.scale, dips};
}

/// Exact frequency summation. One toggle flip-flop per input into
/// an n-input XOR: the output parity flips at every input pulse, so the
/// transition count equals the total input pulse count exactly. The result
/// appears divided deterministically by 2; edge_double restores pulses.
inline LevelTrace sum_exact(const std::vector<PulseTrain>& trains) {
    if (trains.empty()) throw std::invalid_argument("sum_exact: need >= 1 train");
    std::vector<double> merged;
    std::size_t total = 0;
    for (const auto& t : trains) {
        if (t.horizon != trains[0].horizon) throw std::invalid_argument("sum_exact: horizon mismatch");
        total += t.edges.size();
    }
    merged.reserve(total);
    for (const auto& t : trains) merged.insert(merged.end(), t.edges.begin(), t.edges.end());
    std::sort(merged.begin(), merged.end());
    return LevelTrace{false, std::move(merged), trains[0].horizon};
}

// ---------------------------------------------------------------- expressions

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Const, Var, Mul, Add, Sub, Scale } kind;
    double cval = 0.0;            // Const
    std::string name;             // Var
    std::uint64_t k = 0;          // Scale factor k/2^n2
    unsigned n2 = 0;
    std::vector<ExprPtr> children;
};

inline ExprPtr expr_const(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("constants must lie in [0,1]");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Const;
    n->cval = c;
    return n;
}

inline ExprPtr expr_var(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Var;
    n->name = std::move(name);
    return n;
}

inline ExprPtr expr_binary(ExprNode::Kind kind, ExprPtr l, ExprPtr r) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->children = {std::move(l), std::move(r)};
    return n;
}

inline ExprPtr expr_mul_n(std::vector<ExprPtr> children) {
    if (children.size() < 2) throw std::invalid_argument("expr_mul_n: need >= 2 factors");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Mul;
    n->children = std::move(children);
    return n;
}

inline ExprPtr expr_scale(std::uint64_t k, unsigned n2, ExprPtr child) {
    LambdaFactor check(n2, k);   // validates k <= 2^N
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Scale;
    n->k = k;
    n->n2 = n2;
    n->children = {std::move(child)};
    return n;
}

/// Exact arithmetic evaluation of an AST over [0,1] bindings.
inline double exact_eval(const ExprPtr& e, const std::map<std::string, double>& bindings) {
    switch (e->kind) {
    case ExprNode::Kind::Const: return e->cval;
    case ExprNode::Kind::Var: {
        auto it = bindings.find(e->name);
        if (it == bindings.end()) throw std::invalid_argument("unbound variable " + e->name);
        return it->second;
    }
    case ExprNode::Kind::Mul: {
        double v = 1.0;
        for (const auto& c : e->children) v *= exact_eval(c, bindings);
        return v;
    }
    case ExprNode::Kind::Add:
        return exact_eval(e->children[0], bindings) + exact_eval(e->children[1], bindings);
    case ExprNode::Kind::Sub:
        return exact_eval(e->children[0], bindings) - exact_eval(e->children[1], bindings);
    case ExprNode::Kind::Scale:
        return double(e->k) / double(std::uint64_t(1) << e->n2) * exact_eval(e->children[0], bindings);
    }
    throw std::logic_error("exact_eval");
}

inline std::string expr_repr(const ExprPtr& e) {
    switch (e->kind) {
    case ExprNode::Kind::Const: { std::ostringstream os; os << e->cval; return os.str(); }
    case ExprNode::Kind::Var: return e->name;
    case ExprNode::Kind::Mul: {
        std::string s = "(";
        for (std::size_t i = 0; i < e->children.size(); ++i)
            s += (i ? " * " : "") + expr_repr(e->children[i]);
        return s + ")";
    }
    case ExprNode::Kind::Add:
        return "(" + expr_repr(e->children[0]) + " + " + expr_repr(e->children[1]) + ")";
    case ExprNode::Kind::Sub:
        return "(" + expr_repr(e->children[0]) + " - " + expr_repr(e->children[1]) + ")";
    case ExprNode::Kind::Scale:
        return "scale(" + std::to_string(e->k) + ", " + std::to_string(e->n2) + ", " +
               expr_repr(e->children[0]) + ")";
    }
    throw std::logic_error("expr_repr");
}

// grammar: expr := const | ident | (expr op expr) | scale(k, N, expr)
//          op   := '*' | '+' | '-'
class ExprParser {
public:
    explicit ExprParser(std::string text) : text_(std::move(text)) {}

    ExprPtr parse() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return e;
    }

private:
    ExprPtr parse_expr() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr l = parse_expr();
            skip_ws();
            if (pos_ >= text_.size()) fail("expected operator");
            char op = text_[pos_++];
            ExprNode::Kind kind;
            switch (op) {
            case '*': kind = ExprNode::Kind::Mul; break;
            case '+': kind = ExprNode::Kind::Add; break;
            case '-': kind = ExprNode::Kind::Sub; break;
            default: fail(std::string("unknown operator '") + op + "'");
            }
            ExprPtr r = parse_expr();
            skip_ws();
            expect(')');
            return expr_binary(kind, std::move(l), std::move(r));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(text_.substr(pos_), &used);
            pos_ += used;
            return expr_const(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string ident = parse_ident();
            if (ident == "scale") {
                skip_ws();
                expect('(');
                std::uint64_t k = parse_uint();
                skip_ws(); expect(',');
                unsigned n2 = unsigned(parse_uint());
                skip_ws(); expect(',');
                ExprPtr child = parse_expr();
                skip_ws();
                expect(')');
                return expr_scale(k, n2, std::move(child));
            }
            return expr_var(ident);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    std::uint64_t parse_uint() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected integer");
        return std::stoull(text_.substr(start, pos_ - start));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw std::runtime_error("expression parse error at offset " + std::to_string(pos_) + ": " + msg);
    }

    std::string text_;
    std::size_t pos_ = 0;
};

inline ExprPtr parse_expr(const std::string& text) { return ExprParser(text).parse(); }

/// One compiled node: AST pointer plus its Hz-per-unit scale.
struct CompiledNode {
    ExprPtr expr;
    double scale;
    bool approximate;        // true below any Sub node
    std::vector<int> children;
};

/// Values live in [0,1]; every node carries an explicit Hz-per-unit scale
/// because the AND product lands on a different scale (coincidence-rate law). Add/Sub
/// require equal child scales; Scale multiplies the value, not the scale.
struct CompiledExpr {
    std::vector<CompiledNode> nodes;   // post-order; back() is the root
    double f_max;
    double width;
    double g;
    unsigned const_bits;               // Const(c) quantized to k/2^const_bits

    const CompiledNode& root() const { return nodes.back(); }
};

inline int compile_node(CompiledExpr& ce, const ExprPtr& e) {
    CompiledNode node;
    node.expr = e;
    node.approximate = false;
    for (const auto& c : e->children) {
        int ci = compile_node(ce, c);
        node.children.push_back(ci);
        node.approximate = node.approximate || ce.nodes[std::size_t(ci)].approximate;
    }
    auto cscale = [&](std::size_t i) { return ce.nodes[std::size_t(node.children[i])].scale; };
    switch (e->kind) {
    case ExprNode::Kind::Const: {
        double step = 1.0 / double(std::uint64_t(1) << ce.const_bits);
        std::uint64_t k = std::uint64_t(std::llround(e->cval / step));
        if (std::fabs(e->cval - double(k) * step) > step)
            throw std::invalid_argument("constant not representable at requested resolution");
        node.scale = ce.f_max;
        break;
    }
    case ExprNode::Kind::Var:
        node.scale = ce.f_max;
        break;
    case ExprNode::Kind::Mul: {
        if (e->children.size() == 2) {
            node.scale = (ce.width + ce.width + ce.g) * cscale(0) * cscale(1);
        } else {
            if (ce.g != 0.0) throw std::invalid_argument("n-ary Mul supports g = 0 only");
            double coeff = double(e->children.size()) * std::pow(ce.width, double(e->children.size() - 1));
            node.scale = coeff;
            for (std::size_t i = 0; i < e->children.size(); ++i) node.scale *= cscale(i);
        }
        break;
    }
    case ExprNode::Kind::Add:
    case ExprNode::Kind::Sub:
        if (cscale(0) != cscale(1))
            throw std::invalid_argument("scale mismatch at " + expr_repr(e) +
                                        "; insert a scale() normalizer");
        node.scale = cscale(0);
        if (e->kind == ExprNode::Kind::Sub) node.approximate = true;
        break;
    case ExprNode::Kind::Scale:
        node.scale = cscale(0);
        break;
    }
    ce.nodes.push_back(std::move(node));
    return int(ce.nodes.size()) - 1;
}

inline CompiledExpr compile_expr(const ExprPtr& ast, RateHz f_max, double width, double g = 0.0,
                                 unsigned const_bits = 20) {
    CompiledExpr ce;
    ce.f_max = f_max.value;
    ce.width = width;
    ce.g = g;
    ce.const_bits = const_bits;
    compile_node(ce, ast);
    return ce;
}

/// Structural export of a compiled expression as a logic_core netlist.
/// Every Var or Const occurrence becomes an input port carrying an
/// independent full-entropy RPT: Var nodes expect their train at rate
/// value * f_max on port VAR<i>_<name>; Const nodes expect a full-rate
/// (f_max) train on port SRC<i> which is then quantized by an RPS/SWITCH/DLY
/// cascade. Mul maps to AND (the coincidence product), Add to the XOR
/// parity merge, Sub to the OR whose dips carry the difference, and Scale
/// to a lambda cascade. The root drives port OUT.
inline Netlist export_netlist(const CompiledExpr& ce) {
    Netlist nl;
    std::vector<int> net_of(ce.nodes.size(), -1);
    for (std::size_t i = 0; i < ce.nodes.size(); ++i) {
        const CompiledNode& node = ce.nodes[i];
        const ExprPtr& e = node.expr;
        const std::string tag = std::to_string(i);
        std::vector<int> child_nets;
        for (int c : node.children) child_nets.push_back(net_of[std::size_t(c)]);
        switch (e->kind) {
        case ExprNode::Kind::Var:
            net_of[i] = nl.add_net();
            nl.add_port("VAR" + tag + "_" + e->name, net_of[i]);
            break;
        case ExprNode::Kind::Const: {
            int src = nl.add_net();
            nl.add_port("SRC" + tag, src);
            double step = 1.0 / double(std::uint64_t(1) << ce.const_bits);
            std::uint64_t k = std::uint64_t(std::llround(e->cval / step));
            net_of[i] = append_lambda_cascade(nl, src, LambdaFactor(ce.const_bits, k),
                                              "const" + tag + "_");
            break;
        }
        case ExprNode::Kind::Mul:
            net_of[i] = nl.add_net();
            nl.add("mul" + tag, CompKind::AND, child_nets, {net_of[i]});
            break;
        case ExprNode::Kind::Add:
            net_of[i] = nl.add_net();
            nl.add("add" + tag, CompKind::XOR, child_nets, {net_of[i]});
            break;
        case ExprNode::Kind::Sub:
            net_of[i] = nl.add_net();
            nl.add("sub" + tag, CompKind::OR, child_nets, {net_of[i]});
            break;
        case ExprNode::Kind::Scale:
            net_of[i] = append_lambda_cascade(nl, child_nets[0], LambdaFactor(e->n2, e->k),
                                              "scale" + tag + "_");
            break;
        }
    }
    nl.add_port("OUT", net_of.back());
    nl.validate();
    return nl;
}

struct NodeMeasurement {
    int node;
    std::string repr;
    std::size_t pulses;
    double scale;
    double value;
    double stderr_est;   // Poisson: sqrt(count)/T/scale
    bool approximate;
};

struct EvalReport {
    double value;
    double stderr_est;
    double scale;
    std::vector<NodeMeasurement> per_node;
};

/// Monte Carlo evaluation: generates independent variable RPTs at rate
/// value * f_max (a fresh train per Var occurrence, as decorrelation
/// requires), runs the circuit semantics, and reads mean_frequency / scale.
inline EvalReport eval_expr(const CompiledExpr& ce, const std::map<std::string, double>& bindings,
                            double horizon, EntropySource& entropy) {
    std::vector<PulseTrain> trains(ce.nodes.size());
    EvalReport report;
    int src_counter = 0;
    for (std::size_t i = 0; i < ce.nodes.size(); ++i) {
        const CompiledNode& node = ce.nodes[i];
        const ExprPtr& e = node.expr;
        PulseTrain& out = trains[i];
        switch (e->kind) {
        case ExprNode::Kind::Var: {
            auto it = bindings.find(e->name);
            if (it == bindings.end()) throw std::invalid_argument("unbound variable " + e->name);
            if (!(it->second >= 0.0 && it->second <= 1.0))
                throw std::invalid_argument("binding out of [0,1] for " + e->name);
            EntropySource src = entropy.fork("var" + std::to_string(src_counter++));
            out = it->second == 0.0 ? PulseTrain{{}, ce.width, horizon}
                                    : generate_rpt(src, RateHz(it->second * ce.f_max), ce.width, horizon);
            break;
        }
        case ExprNode::Kind::Const: {
            EntropySource src = entropy.fork("const" + std::to_string(src_counter++));
            if (e->cval == 0.0) { out = PulseTrain{{}, ce.width, horizon}; break; }
            PulseTrain full = generate_rpt(src, RateHz(ce.f_max), ce.width, horizon);
            double step = 1.0 / double(std::uint64_t(1) << ce.const_bits);
            std::uint64_t k = std::uint64_t(std::llround(e->cval / step));
            LambdaFactor lf(ce.const_bits, k);
            out = lambda_multiplier(full, lf, src);
            break;
        }
        case ExprNode::Kind::Mul: {
            std::vector<PulseTrain> inputs;
            for (int c : node.children) inputs.push_back(trains[std::size_t(c)]);
            out = inputs.size() == 2 ? and_overlap(inputs[0], inputs[1], ce.g)
                                     : and_overlap_n(inputs);
            break;
        }
        case ExprNode::Kind::Add: {
            LevelTrace parity = sum_exact({trains[std::size_t(node.children[0])],
                                           trains[std::size_t(node.children[1])]});
            out = canonicalize(edge_double(parity, ce.width));
            break;
        }
        case ExprNode::Kind::Sub: {
            RptValue a{trains[std::size_t(node.children[0])], node.scale};
            RptValue b{trains[std::size_t(node.children[1])], node.scale};
            // the literal subtractor output is a level waveform; we retain the dip
            // start times as a train so downstream nodes stay well-formed
            out = PulseTrain{{}, ce.width, horizon};
            std::size_t ai = 0;
            const auto& ae = a.train.edges;
            for (double tb : b.train.edges) {
                while (ai < ae.size() && ae[ai] + a.train.width <= tb) ++ai;
                bool covered = ai < ae.size() && ae[ai] < tb + b.train.width;
                if (!covered) out.edges.push_back(tb);
            }
            out = canonicalize(out);
            break;
        }
        case ExprNode::Kind::Scale: {
            EntropySource src = entropy.fork("scale" + std::to_string(src_counter++));
            LambdaFactor lf(e->n2, e->k);
            out = lambda_multiplier(trains[std::size_t(node.children[0])], lf, src);
            break;
        }
        }
        double value = double(out.edges.size()) / horizon / node.scale;
        report.per_node.push_back({int(i), expr_repr(e), out.edges.size(), node.scale, value,
                                   std::sqrt(double(out.edges.size())) / horizon / node.scale,
                                   node.approximate});
    }
    const NodeMeasurement& rootm = report.per_node.back();
    report.value = rootm.value;
    report.stderr_est = rootm.stderr_est;
    report.scale = rootm.scale;
    return report;
}

} // namespace randpulse
