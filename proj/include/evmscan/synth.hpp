// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common.hpp"
#include "corpus.hpp"
#include "disasm.hpp"
#include "errors.hpp"
#include "opcodes.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace evmscan
{
/// Minimal assembler with symbolic jump targets. label() emits a JUMPDEST;
/// push_label() emits a PUSH2 patched to the label's pc by assemble().
class Assembler
{
public:
    Assembler& op(uint8_t opcode)
    {
        code_.push_back(opcode);
        ++instructions_;
        return *this;
    }

    /// Shortest PUSHn holding `value` (PUSH1 for zero).
    Assembler& push(uint64_t value)
    {
        size_t n = 1;
        while (n < 8 && (value >> (8 * n)) != 0)
            ++n;
        return push_n(value, n);
    }

    /// PUSHn with exactly `n` immediate bytes (1..8).
    Assembler& push_n(uint64_t value, size_t n)
    {
        op(static_cast<uint8_t>(OP_PUSH1 + n - 1));
        for (size_t i = n; i-- > 0;)
            code_.push_back(static_cast<uint8_t>(value >> (8 * i)));
        return *this;
    }

    Assembler& push_label(const std::string& name)
    {
        op(OP_PUSH2);
        fixups_.emplace_back(code_.size(), name);
        code_.push_back(0);
        code_.push_back(0);
        return *this;
    }

    Assembler& label(const std::string& name)
    {
        if (!labels_.emplace(name, code_.size()).second)
            throw ConfigError("duplicate label " + name);
        return op(OP_JUMPDEST);
    }

    size_t instruction_count() const noexcept { return instructions_; }
    size_t size() const noexcept { return code_.size(); }

    Bytes assemble() const
    {
        Bytes out = code_;
        for (const auto& [at, name] : fixups_)
        {
            const auto it = labels_.find(name);
            if (it == labels_.end())
                throw ConfigError("undefined label " + name);
            if (it->second > 0xffff)
                throw ConfigError("label " + name + " beyond PUSH2 range");
            out[at] = static_cast<uint8_t>(it->second >> 8);
            out[at + 1] = static_cast<uint8_t>(it->second);
        }
        return out;
    }

private:
    Bytes code_;
    size_t instructions_ = 0;
    std::map<std::string, size_t> labels_;
    std::vector<std::pair<size_t, std::string>> fixups_;
};

struct SyntheticContract
{
    std::string id;
    Bytes code;
    LabelSet labels;
};

struct SynthOptions
{
    double positive_rate = 0.4;
    /// Probability that a negative contract still carries the class's trigger
    /// opcode in a safe context.
    double decoy_rate = 0.7;
    size_t min_fillers = 1;
    size_t max_fillers = 4;
    /// Keep adding filler functions until the contract has at least this many
    /// instructions (0 disables).
    size_t target_instructions = 0;
};

namespace synth
{
inline constexpr const char* kFail = "fail";

using Emitter = std::function<void(Assembler&)>;

// if (storage[0] != caller) revert
inline void owner_guard(Assembler& a)
{
    a.push(0).op(OP_SLOAD).op(OP_CALLER).op(OP_EQ).op(OP_ISZERO).push_label(kFail).op(OP_JUMPI);
}

inline void return_word(Assembler& a)
{
    a.push(0).op(OP_MSTORE).push(0x20).push(0).op(OP_RETURN);
}

// Reentrancy. Positive: the balance is cleared after the external call.
// Negative: the same instructions with the store hoisted before the call.
inline void withdraw(Assembler& a, bool vulnerable, bool delegate)
{
    a.op(OP_CALLER).push(0).op(OP_MSTORE).push(0x40).push(0).op(OP_SHA3).op(OP_DUP1).op(OP_SLOAD);
    if (!vulnerable)
        a.push(0).op(OP_DUP1 + 2).op(OP_SSTORE);
    a.push(0).op(OP_DUP1).push(0).op(OP_DUP1).op(OP_DUP1 + 4).op(OP_CALLER).op(OP_GAS);
    a.op(delegate ? OP_DELEGATECALL : OP_CALL);
    a.op(OP_ISZERO).push_label(kFail).op(OP_JUMPI);
    if (vulnerable)
        a.push(0).op(OP_DUP1 + 2).op(OP_SSTORE);
    a.op(OP_POP).op(OP_POP).op(OP_STOP);
}

inline void set_owner(Assembler& a, bool guarded)
{
    if (guarded)
        owner_guard(a);
    a.push(4).op(OP_CALLDATALOAD).push(0).op(OP_SSTORE).op(OP_STOP);
}

inline void kill(Assembler& a, bool guarded)
{
    if (guarded)
        owner_guard(a);
    a.op(OP_CALLER).op(OP_SELFDESTRUCT);
}

// Timestamp dependency. Positive: the timestamp decides a branch.
// Negative: the timestamp is only stored; the branch tests the call value.
inline void timed_payout(Assembler& a, bool vulnerable, uint64_t bound)
{
    a.op(vulnerable ? OP_TIMESTAMP : OP_CALLVALUE).push_n(bound, 4).op(OP_GT).op(OP_ISZERO);
    a.push_label(kFail).op(OP_JUMPI);
    a.op(vulnerable ? OP_CALLVALUE : OP_TIMESTAMP).push(2).op(OP_SSTORE).op(OP_STOP);
}

// Arithmetic. `checked` adds the overflow comparison and conditional revert
// right after the operation.
inline void accumulate(Assembler& a, bool checked, uint8_t arith)
{
    a.push(4).op(OP_CALLDATALOAD).push(1).op(OP_SLOAD).op(OP_DUP1).op(OP_DUP1 + 2).op(arith);
    a.op(OP_DUP1).op(OP_SWAP1 + 1);
    if (checked)
        a.op(arith == OP_SUB ? OP_LT : OP_GT).push_label(kFail).op(OP_JUMPI);
    else
        a.op(OP_POP);
    a.push(1).op(OP_SSTORE).op(OP_POP).op(OP_STOP);
}

// Companion of accumulate(): carries the comparison/branch in the unchecked
// variant so both variants contain the same opcodes.
inline void cap_check(Assembler& a, bool carries_check)
{
    a.op(OP_CALLVALUE).push(1).op(OP_SLOAD);
    if (carries_check)
        a.op(OP_GT).push_label(kFail).op(OP_JUMPI).op(OP_POP);
    else
        a.op(OP_POP).op(OP_POP);
    a.push(0).push(0).op(OP_RETURN);
}

// Benign functions with no trigger opcodes.
inline void filler(Assembler& a, SplitMix64& rng, size_t length)
{
    switch (rng.below(5))
    {
    case 0:
        a.push(rng.between(2, 40)).op(OP_SLOAD);
        return_word(a);
        break;
    case 1:
        a.push(4).op(OP_CALLDATALOAD).push(rng.between(2, 40)).op(OP_SSTORE).op(OP_STOP);
        break;
    case 2:
        owner_guard(a);
        a.push(4).op(OP_CALLDATALOAD).push(rng.between(2, 40)).op(OP_SSTORE).op(OP_STOP);
        break;
    case 3:
        a.op(OP_CALLVALUE).push(rng.between(1, 255)).op(OP_GT).push_label(kFail).op(OP_JUMPI);
        a.push(rng.between(2, 40)).op(OP_SLOAD);
        return_word(a);
        break;
    default:
    {
        a.push(4).op(OP_CALLDATALOAD);
        for (size_t i = 0; i < length; ++i)
        {
            switch (rng.below(8))
            {
            case 0:
                a.op(OP_DUP1).op(OP_AND);
                break;
            case 1:
                a.op(OP_DUP1).op(OP_OR);
                break;
            case 2:
                a.push(rng.between(1, 255)).op(OP_XOR);
                break;
            case 3:
                a.op(OP_NOT);
                break;
            case 4:
                a.push(rng.between(1, 31)).op(OP_SHL);
                break;
            case 5:
                a.push(rng.between(1, 31)).op(OP_SHR);
                break;
            case 6:
                a.op(OP_DUP1).push(rng.between(0, 255)).op(OP_MSTORE);
                break;
            default:
                a.push(rng.between(0, 255)).op(OP_MLOAD).op(OP_XOR);
                break;
            }
        }
        return_word(a);
        break;
    }
    }
}
}  // namespace synth

/// One contract with a selector dispatcher and one function per behaviour.
/// Positive classes get their vulnerable template; negative classes get the
/// safe twin (probability decoy_rate) or nothing.
inline Bytes generate_contract(LabelSet labels, SplitMix64& rng, const SynthOptions& opt = {})
{
    std::vector<synth::Emitter> functions;

    for (const auto cls : kAllVulnClasses)
    {
        const bool positive = labels.has(cls);
        if (!positive && !rng.chance(opt.decoy_rate))
            continue;
        switch (cls)
        {
        case VulnClass::RV:
        {
            const bool delegate = rng.chance(0.25);
            functions.push_back([=](Assembler& a) { synth::withdraw(a, positive, delegate); });
            break;
        }
        case VulnClass::SD:
            functions.push_back([=](Assembler& a) { synth::kill(a, !positive); });
            functions.push_back([=](Assembler& a) { synth::set_owner(a, positive); });
            break;
        case VulnClass::TDV:
        {
            const auto bound = rng.between(1'600'000'000, 1'900'000'000);
            functions.push_back([=](Assembler& a) { synth::timed_payout(a, positive, bound); });
            break;
        }
        case VulnClass::AV:
        {
            static constexpr uint8_t ops[] = {OP_ADD, OP_SUB, OP_MUL};
            const auto arith = ops[rng.below(3)];
            functions.push_back([=](Assembler& a) { synth::accumulate(a, !positive, arith); });
            functions.push_back([=](Assembler& a) { synth::cap_check(a, positive); });
            break;
        }
        }
    }

    const auto n_fillers = rng.between(opt.min_fillers, std::max(opt.min_fillers, opt.max_fillers));
    auto add_filler = [&] {
        const auto length = rng.between(2, 24);
        const auto sub_seed = rng.next();
        functions.push_back([=](Assembler& a) {
            SplitMix64 local(sub_seed);
            synth::filler(a, local, length);
        });
    };
    for (size_t i = 0; i < n_fillers; ++i)
        add_filler();
    rng.shuffle(functions);

    std::set<uint32_t> used;
    std::vector<uint32_t> selectors;
    auto fresh_selector = [&] {
        uint32_t s;
        do
            s = static_cast<uint32_t>(rng.next());
        while (!used.insert(s).second);
        return s;
    };

    auto assemble = [&](Assembler& a) {
        while (selectors.size() < functions.size())
            selectors.push_back(fresh_selector());
        a.push(0x80).push(0x40).op(OP_MSTORE);
        a.push(4).op(OP_CALLDATASIZE).op(OP_LT).push_label("fallback").op(OP_JUMPI);
        a.push(0).op(OP_CALLDATALOAD).push(0xe0).op(OP_SHR);
        for (size_t i = 0; i < functions.size(); ++i)
            a.op(OP_DUP1).push_n(selectors[i], 4).op(OP_EQ).push_label("f" + std::to_string(i)).op(OP_JUMPI);
        a.label("fallback").push(0).op(OP_DUP1).op(OP_REVERT);
        for (size_t i = 0; i < functions.size(); ++i)
        {
            a.label("f" + std::to_string(i));
            functions[i](a);
        }
        a.label(synth::kFail).push(0).op(OP_DUP1).op(OP_REVERT);
    };

    Assembler a;
    assemble(a);
    while (opt.target_instructions != 0 && a.instruction_count() < opt.target_instructions)
    {
        // Grow in chunks proportional to the remaining gap, then re-assemble.
        const auto missing = opt.target_instructions - a.instruction_count();
        for (size_t k = 0; k < std::max<size_t>(1, missing / 40); ++k)
            add_filler();
        a = Assembler{};
        assemble(a);
    }
    return a.assemble();
}

/// n labeled contracts (n >= 8). The first eight alternate class patterns so
/// each class has at least one positive and one negative contract.
inline std::vector<SyntheticContract> generate_synthetic_corpus(
    size_t n, uint64_t seed, const SynthOptions& opt = {})
{
    if (n < 8)
        throw ConfigError("synthetic corpus needs n >= 8");
    SplitMix64 rng(seed);
    std::vector<SyntheticContract> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i)
    {
        LabelSet labels;
        for (const auto cls : kAllVulnClasses)
        {
            const bool positive =
                i < 8 ? (i + index_of(cls)) % 2 == 0 : rng.chance(opt.positive_rate);
            labels.set(cls, positive);
        }
        char id[24];
        std::snprintf(id, sizeof id, "c%05zu", i);
        out.push_back({id, generate_contract(labels, rng, opt), labels});
    }
    return out;
}

/// Writes <dir>/<id>.hex for every contract and <dir>/labels.csv.
inline void write_synthetic_corpus(const std::string& dir, std::span<const SyntheticContract> corpus)
{
    std::filesystem::create_directories(dir);
    std::string labels;
    for (const auto& c : corpus)
    {
        const auto path = std::filesystem::path(dir) / (c.id + ".hex");
        std::ofstream os(path, std::ios::binary);
        os << to_hex(c.code) << '\n';
        if (!os)
            throw CorpusFormatError("cannot write " + path.string());
        labels += c.id + ',' + c.labels.to_string() + '\n';
    }
    std::ofstream os(std::filesystem::path(dir) / "labels.csv", std::ios::binary);
    os << labels;
    if (!os)
        throw CorpusFormatError("cannot write labels.csv in " + dir);
}

}  // namespace evmscan
