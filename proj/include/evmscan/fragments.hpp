// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cfg.hpp"
#include "vocabulary.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace evmscan
{
enum class VulnClass : uint8_t
{
    RV,   ///< reentrancy
    AV,   ///< arithmetic
    SD,   ///< self-destruct
    TDV,  ///< timestamp dependency
};

inline constexpr size_t kNumVulnClasses = 4;
inline constexpr std::array<VulnClass, kNumVulnClasses> kAllVulnClasses = {
    VulnClass::RV, VulnClass::AV, VulnClass::SD, VulnClass::TDV};

constexpr std::string_view to_string(VulnClass c) noexcept
{
    switch (c)
    {
    case VulnClass::RV:
        return "RV";
    case VulnClass::AV:
        return "AV";
    case VulnClass::SD:
        return "SD";
    case VulnClass::TDV:
        return "TDV";
    }
    return "?";
}

/// Accepts the class codes plus "RA" as an alias of RV.
constexpr std::optional<VulnClass> vuln_class_from_string(std::string_view s) noexcept
{
    if (s == "RV" || s == "RA")
        return VulnClass::RV;
    if (s == "AV")
        return VulnClass::AV;
    if (s == "SD")
        return VulnClass::SD;
    if (s == "TDV")
        return VulnClass::TDV;
    return std::nullopt;
}

constexpr size_t index_of(VulnClass c) noexcept
{
    return static_cast<size_t>(c);
}

struct FunctionSelector
{
    std::array<uint8_t, 4> bytes{};
    size_t entry_block = 0;

    uint32_t value() const noexcept
    {
        return (uint32_t{bytes[0]} << 24) | (uint32_t{bytes[1]} << 16) |
               (uint32_t{bytes[2]} << 8) | bytes[3];
    }

    std::string hex() const { return to_hex(bytes); }

    friend bool operator==(const FunctionSelector&, const FunctionSelector&) = default;
};

struct Fragment
{
    VulnClass vuln_class = VulnClass::RV;
    size_t seed_block = 0;
    /// Member blocks in pc order (block ids are assigned in pc order).
    std::vector<size_t> block_ids;
    /// Member blocks' normalized opcodes joined by SEP.
    std::vector<TokenId> tokens;
    /// Enclosing function, when the seed is reachable from a dispatcher entry.
    std::optional<FunctionSelector> selector;
};

/// Dispatcher entries of the form [DUPn] PUSH4 s, EQ, PUSHn t, JUMPI.
inline std::vector<FunctionSelector> extract_selectors(const Cfg& cfg)
{
    std::vector<FunctionSelector> out;
    for (const auto& b : cfg.blocks)
    {
        const auto& ins = b.instructions;
        if (b.terminator != Terminator::JumpI || ins.size() < 4)
            continue;
        const size_t k = ins.size() - 4;
        if (ins[k].opcode != OP_PUSH4 || ins[k].truncated || ins[k + 1].opcode != OP_EQ ||
            !is_push(ins[k + 2].opcode))
            continue;
        const auto target = ins[k + 2].push_value();
        if (!target)
            continue;
        const auto entry = cfg.block_at_pc(static_cast<size_t>(*target));
        if (!entry || !cfg.blocks[*entry].starts_with_jumpdest())
            continue;
        FunctionSelector sel;
        std::copy(ins[k].immediate.begin(), ins[k].immediate.end(), sel.bytes.begin());
        sel.entry_block = *entry;
        out.push_back(sel);
    }
    return out;
}

namespace detail
{
struct Adjacency
{
    std::vector<std::vector<size_t>> succ;
    std::vector<std::vector<size_t>> pred;

    explicit Adjacency(const Cfg& cfg) : succ(cfg.blocks.size()), pred(cfg.blocks.size())
    {
        for (const auto& e : cfg.edges)
        {
            succ[e.from].push_back(e.to);
            pred[e.to].push_back(e.from);
        }
    }
};

inline bool contains_any(const BasicBlock& b, std::initializer_list<uint8_t> ops)
{
    for (const auto& i : b.instructions)
        for (const auto op : ops)
            if (i.opcode == op)
                return true;
    return false;
}

// A CALL/DELEGATECALL followed by an SSTORE later in the block or in a successor.
inline bool is_reentrancy_seed(const Cfg& cfg, const Adjacency& adj, const BasicBlock& b)
{
    const auto& ins = b.instructions;
    const auto first_call = std::find_if(ins.begin(), ins.end(), [](const Instruction& i) {
        return i.opcode == OP_CALL || i.opcode == OP_DELEGATECALL;
    });
    if (first_call == ins.end())
        return false;
    if (std::any_of(first_call + 1, ins.end(),
            [](const Instruction& i) { return i.opcode == OP_SSTORE; }))
        return true;
    for (const auto s : adj.succ[b.id])
        if (cfg.blocks[s].contains(OP_SSTORE))
            return true;
    return false;
}

inline bool is_seed(const Cfg& cfg, const Adjacency& adj, const BasicBlock& b, VulnClass cls)
{
    switch (cls)
    {
    case VulnClass::SD:
        return b.contains(OP_SELFDESTRUCT);
    case VulnClass::TDV:
        return b.contains(OP_TIMESTAMP);
    case VulnClass::AV:
        return contains_any(b, {OP_ADD, OP_SUB, OP_MUL, OP_DIV});
    case VulnClass::RV:
        return is_reentrancy_seed(cfg, adj, b);
    }
    return false;
}

inline std::vector<TokenId> block_tokens(const Cfg& cfg, std::span<const size_t> ids)
{
    std::vector<TokenId> tokens;
    for (size_t n = 0; n < ids.size(); ++n)
    {
        if (n != 0)
            tokens.push_back(kSepToken);
        for (const auto& i : cfg.blocks[ids[n]].instructions)
            tokens.push_back(to_token(normalize(i.opcode)));
    }
    return tokens;
}
}  // namespace detail

/// One fragment per seed block: the seed plus its direct predecessors and
/// successors. Ordered by seed block id.
inline std::vector<Fragment> match_fragments(const Cfg& cfg, VulnClass cls)
{
    const detail::Adjacency adj(cfg);
    std::vector<Fragment> out;
    for (const auto& b : cfg.blocks)
    {
        if (!detail::is_seed(cfg, adj, b, cls))
            continue;
        Fragment f;
        f.vuln_class = cls;
        f.seed_block = b.id;
        f.block_ids.push_back(b.id);
        f.block_ids.insert(f.block_ids.end(), adj.pred[b.id].begin(), adj.pred[b.id].end());
        f.block_ids.insert(f.block_ids.end(), adj.succ[b.id].begin(), adj.succ[b.id].end());
        std::sort(f.block_ids.begin(), f.block_ids.end());
        f.block_ids.erase(std::unique(f.block_ids.begin(), f.block_ids.end()), f.block_ids.end());
        f.tokens = detail::block_tokens(cfg, f.block_ids);
        out.push_back(std::move(f));
    }
    return out;
}

/// Token prefix of at most `max_len` tokens.
inline std::vector<TokenId> fragment_tokens(const Fragment& frag, size_t max_len)
{
    const auto n = std::min(max_len, frag.tokens.size());
    return {frag.tokens.begin(), frag.tokens.begin() + static_cast<ptrdiff_t>(n)};
}

/// Tags each fragment with the first selector (dispatcher order) whose entry
/// block reaches the fragment's seed.
inline void annotate_selectors(
    std::vector<Fragment>& fragments, const Cfg& cfg, std::span<const FunctionSelector> selectors)
{
    if (fragments.empty() || selectors.empty())
        return;
    const detail::Adjacency adj(cfg);
    std::vector<std::optional<FunctionSelector>> owner(cfg.blocks.size());
    for (const auto& sel : selectors)
    {
        std::vector<bool> seen(cfg.blocks.size(), false);
        std::deque<size_t> queue{sel.entry_block};
        seen[sel.entry_block] = true;
        while (!queue.empty())
        {
            const auto id = queue.front();
            queue.pop_front();
            if (!owner[id])
                owner[id] = sel;
            for (const auto s : adj.succ[id])
            {
                if (!seen[s])
                {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
    }
    for (auto& f : fragments)
        f.selector = owner[f.seed_block];
}

/// Fragments of every class, selector-annotated.
inline std::array<std::vector<Fragment>, kNumVulnClasses> extract_all_fragments(const Cfg& cfg)
{
    std::array<std::vector<Fragment>, kNumVulnClasses> out;
    const auto selectors = extract_selectors(cfg);
    for (const auto cls : kAllVulnClasses)
    {
        out[index_of(cls)] = match_fragments(cfg, cls);
        annotate_selectors(out[index_of(cls)], cfg, selectors);
    }
    return out;
}

/// Line of the fragment dump consumed by the external trainer:
/// contract-id TAB class TAB seed-block-id TAB space-separated-token-names.
inline std::string format_fragment_record(
    std::string_view contract_id, const Fragment& frag, size_t max_len)
{
    std::string line(contract_id);
    line += '\t';
    line += to_string(frag.vuln_class);
    line += '\t';
    line += std::to_string(frag.seed_block);
    line += '\t';
    const auto tokens = fragment_tokens(frag, max_len);
    for (size_t i = 0; i < tokens.size(); ++i)
    {
        if (i != 0)
            line += ' ';
        line += token_name(tokens[i]);
    }
    return line;
}

struct FragmentRecord
{
    std::string contract_id;
    VulnClass vuln_class = VulnClass::RV;
    size_t seed_block = 0;
    std::vector<TokenId> tokens;
};

/// Parses one dump line; nullopt on malformed input. Unknown token names map to UNK.
inline std::optional<FragmentRecord> parse_fragment_record(std::string_view line)
{
    std::array<std::string_view, 4> fields;
    for (size_t f = 0; f < 3; ++f)
    {
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos)
            return std::nullopt;
        fields[f] = line.substr(0, tab);
        line.remove_prefix(tab + 1);
    }
    fields[3] = line;

    FragmentRecord rec;
    rec.contract_id = std::string(fields[0]);
    const auto cls = vuln_class_from_string(fields[1]);
    if (rec.contract_id.empty() || !cls || fields[2].empty())
        return std::nullopt;
    rec.vuln_class = *cls;
    for (const char c : fields[2])
    {
        if (c < '0' || c > '9')
            return std::nullopt;
        rec.seed_block = rec.seed_block * 10 + static_cast<size_t>(c - '0');
    }
    std::istringstream ss{std::string(fields[3])};
    std::string tok;
    while (ss >> tok)
        rec.tokens.push_back(token_from_name(tok));
    return rec;
}

}  // namespace evmscan
