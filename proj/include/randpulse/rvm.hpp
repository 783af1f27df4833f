// randpulse: toy register VM with probabilistic branch instructions.
//
// Assembly text format, one instruction per line, ';' comments, 'label:' on
// its own line or before an instruction:
//   LOADI rD, imm        MOV rD, rS         ADD rD, rS        SUB rD, rS
//   CMP rA, rB           IF cond label      GOTO label        HALT
//   RIF prob cond label_then label_else     RGOTO l1, l2, ...
//   RND24 rD
// cond in {EQ, NE, LT, LE, GT, GE}, evaluated against the last CMP.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "randpulse/entropy.hpp"

namespace randpulse::rvm {

constexpr unsigned kNumRegisters = 16;

enum class Opcode { LOADI, MOV, ADD, SUB, CMP, IF, GOTO, RIF, RGOTO, RND24, HALT };

enum class Cond { EQ, NE, LT, LE, GT, GE };

struct Instr {
    Opcode op;
    int rd = -1, rs = -1;
    double imm = 0.0;
    double prob = 0.0;
    Cond cond = Cond::EQ;
    std::vector<int> targets;   // resolved instruction indices
};

struct Program {
    std::vector<Instr> instructions;
    std::map<std::string, int> labels;
};

enum class BranchKind { rif_then, rif_else, rgoto };

struct BranchRecord {
    std::size_t step;
    int pc;
    BranchKind kind;
    int taken;           // chosen target index within the instruction
};

struct VmState {
    std::vector<double> registers = std::vector<double>(kNumRegisters, 0.0);
    int pc = 0;
    bool halted = false;
    bool fuel_exhausted = false;
    std::size_t steps = 0;
    double cmp = 0.0;    // rA - rB of the last CMP
};

struct RunResult {
    VmState state;
    std::vector<BranchRecord> branch_trace;
};

namespace detail {

inline int parse_reg(const std::string& tok) {
    if (tok.size() < 2 || (tok[0] != 'r' && tok[0] != 'R'))
        throw std::runtime_error("expected register, got '" + tok + "'");
    int idx = std::stoi(tok.substr(1));
    if (idx < 0 || idx >= int(kNumRegisters)) throw std::runtime_error("register out of range: " + tok);
    return idx;
}

inline Cond parse_cond(const std::string& tok) {
    if (tok == "EQ") return Cond::EQ;
    if (tok == "NE") return Cond::NE;
    if (tok == "LT") return Cond::LT;
    if (tok == "LE") return Cond::LE;
    if (tok == "GT") return Cond::GT;
    if (tok == "GE") return Cond::GE;
    throw std::runtime_error("unknown condition '" + tok + "'");
}

} // namespace detail

inline Program parse_program(const std::string& text) {
    struct Pending { std::vector<std::string> label_refs; };
    Program prog;
    std::vector<std::vector<std::string>> pending_labels;   // per instruction
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
        // labels may prefix the instruction
        for (;;) {
            std::size_t i = 0;
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_'))
                ++j;
            if (j > i && j < line.size() && line[j] == ':') {
                prog.labels[line.substr(i, j - i)] = int(prog.instructions.size());
                line.erase(0, j + 1);
            } else break;
        }
        std::string norm;
        for (char ch : line) norm += (ch == ',') ? ' ' : ch;
        std::istringstream ls(norm);
        std::string word;
        if (!(ls >> word)) continue;
        Instr ins;
        std::vector<std::string> labels;
        auto err = [&](const std::string& m) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": " + m);
        };
        try {
            std::string tok;
            if (word == "LOADI") { ins.op = Opcode::LOADI; ls >> tok; ins.rd = detail::parse_reg(tok); ls >> ins.imm; }
            else if (word == "MOV") { ins.op = Opcode::MOV; ls >> tok; ins.rd = detail::parse_reg(tok); ls >> tok; ins.rs = detail::parse_reg(tok); }
            else if (word == "ADD") { ins.op = Opcode::ADD; ls >> tok; ins.rd = detail::parse_reg(tok); ls >> tok; ins.rs = detail::parse_reg(tok); }
            else if (word == "SUB") { ins.op = Opcode::SUB; ls >> tok; ins.rd = detail::parse_reg(tok); ls >> tok; ins.rs = detail::parse_reg(tok); }
            else if (word == "CMP") { ins.op = Opcode::CMP; ls >> tok; ins.rd = detail::parse_reg(tok); ls >> tok; ins.rs = detail::parse_reg(tok); }
            else if (word == "IF") { ins.op = Opcode::IF; ls >> tok; ins.cond = detail::parse_cond(tok); ls >> tok; labels.push_back(tok); }
            else if (word == "GOTO") { ins.op = Opcode::GOTO; ls >> tok; labels.push_back(tok); }
            else if (word == "RIF") {
                ins.op = Opcode::RIF;
                ls >> ins.prob;
                if (!(ins.prob >= 0.0 && ins.prob <= 1.0)) throw std::runtime_error("RIF prob must be in [0,1]");
                ls >> tok; ins.cond = detail::parse_cond(tok);
                ls >> tok; labels.push_back(tok);
                ls >> tok; labels.push_back(tok);
            }
            else if (word == "RGOTO") {
                ins.op = Opcode::RGOTO;
                while (ls >> tok) labels.push_back(tok);
                if (labels.empty()) throw std::runtime_error("RGOTO needs at least one label");
            }
            else if (word == "RND24") { ins.op = Opcode::RND24; ls >> tok; ins.rd = detail::parse_reg(tok); }
            else if (word == "HALT") { ins.op = Opcode::HALT; }
            else throw std::runtime_error("unknown instruction '" + word + "'");
            if (ls.fail() && ins.op != Opcode::HALT && ins.op != Opcode::RGOTO)
                throw std::runtime_error("malformed operands for " + word);
        } catch (const std::runtime_error& ex) {
            err(ex.what());
        }
        prog.instructions.push_back(std::move(ins));
        pending_labels.push_back(std::move(labels));
    }
    for (std::size_t i = 0; i < prog.instructions.size(); ++i)
        for (const std::string& l : pending_labels[i]) {
            auto it = prog.labels.find(l);
            if (it == prog.labels.end())
                throw std::runtime_error("unresolved label '" + l + "'");
            prog.instructions[i].targets.push_back(it->second);
        }
    return prog;
}

/// 24 fresh random bits as a mantissa value in [0,1); one VM step.
inline double rnd24(EntropySource& entropy) {
    std::uint32_t v = 0;
    for (int b = 0; b < 24; ++b) v = (v << 1) | unsigned(entropy.next_bit());
    return double(v) * 0x1.0p-24;
}

inline bool eval_cond(Cond c, double cmp) {
    switch (c) {
    case Cond::EQ: return cmp == 0.0;
    case Cond::NE: return cmp != 0.0;
    case Cond::LT: return cmp < 0.0;
    case Cond::LE: return cmp <= 0.0;
    case Cond::GT: return cmp > 0.0;
    case Cond::GE: return cmp >= 0.0;
    }
    return false;
}

/// Uniform choice among n targets by unbiased rejection sampling over
/// ceil(log2 n) bits.
inline int uniform_choice(std::size_t n, EntropySource& entropy) {
    if (n == 0) throw std::invalid_argument("uniform_choice: empty target list");
    if (n == 1) return 0;
    unsigned bits = 0;
    while ((std::size_t(1) << bits) < n) ++bits;
    for (;;) {
        std::size_t v = 0;
        for (unsigned b = 0; b < bits; ++b) v = (v << 1) | unsigned(entropy.next_bit());
        if (v < n) return int(v);
    }
}

inline RunResult run(const Program& prog, const std::vector<double>& inputs, EntropySource& entropy,
                     std::size_t fuel = 1000000) {
    RunResult result;
    VmState& st = result.state;
    for (std::size_t i = 0; i < inputs.size() && i < kNumRegisters; ++i) st.registers[i] = inputs[i];
    while (!st.halted && st.pc >= 0 && st.pc < int(prog.instructions.size())) {
        if (st.steps >= fuel) {
            st.fuel_exhausted = true;
            break;
        }
        const Instr& ins = prog.instructions[std::size_t(st.pc)];
        int next = st.pc + 1;
        switch (ins.op) {
        case Opcode::LOADI: st.registers[std::size_t(ins.rd)] = ins.imm; break;
        case Opcode::MOV: st.registers[std::size_t(ins.rd)] = st.registers[std::size_t(ins.rs)]; break;
        case Opcode::ADD: st.registers[std::size_t(ins.rd)] += st.registers[std::size_t(ins.rs)]; break;
        case Opcode::SUB: st.registers[std::size_t(ins.rd)] -= st.registers[std::size_t(ins.rs)]; break;
        case Opcode::CMP: st.cmp = st.registers[std::size_t(ins.rd)] - st.registers[std::size_t(ins.rs)]; break;
        case Opcode::IF:
            if (eval_cond(ins.cond, st.cmp)) next = ins.targets[0];
            break;
        case Opcode::GOTO: next = ins.targets[0]; break;
        case Opcode::RIF: {
            // randomness applies only on the cond-true side; cond false
            // branches deterministically to else
            bool then_taken = eval_cond(ins.cond, st.cmp) && rnd24(entropy) < ins.prob;
            next = then_taken ? ins.targets[0] : ins.targets[1];
            result.branch_trace.push_back({st.steps, st.pc,
                                           then_taken ? BranchKind::rif_then : BranchKind::rif_else,
                                           then_taken ? 0 : 1});
            break;
        }
        case Opcode::RGOTO: {
            int choice = uniform_choice(ins.targets.size(), entropy);
            next = ins.targets[std::size_t(choice)];
            result.branch_trace.push_back({st.steps, st.pc, BranchKind::rgoto, choice});
            break;
        }
        case Opcode::RND24: st.registers[std::size_t(ins.rd)] = rnd24(entropy); break;
        case Opcode::HALT: st.halted = true; break;
        }
        st.pc = next;
        ++st.steps;
    }
    return result;
}

} // namespace randpulse::rvm
