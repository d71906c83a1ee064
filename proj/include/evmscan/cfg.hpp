// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disasm.hpp"
#include "vocabulary.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evmscan
{
enum class Terminator
{
    Jump,
    JumpI,
    Stop,
    Return,
    Revert,
    Invalid,
    SelfDestruct,
    FallThrough,  ///< next instruction is a JUMPDEST
    EndOfCode,
};

constexpr std::string_view to_string(Terminator t) noexcept
{
    switch (t)
    {
    case Terminator::Jump:
        return "JUMP";
    case Terminator::JumpI:
        return "JUMPI";
    case Terminator::Stop:
        return "STOP";
    case Terminator::Return:
        return "RETURN";
    case Terminator::Revert:
        return "REVERT";
    case Terminator::Invalid:
        return "INVALID";
    case Terminator::SelfDestruct:
        return "SELFDESTRUCT";
    case Terminator::FallThrough:
        return "FALLTHROUGH";
    case Terminator::EndOfCode:
        return "END-OF-CODE";
    }
    return "?";
}

constexpr Terminator terminator_of(uint8_t op) noexcept
{
    switch (op)
    {
    case OP_JUMP:
        return Terminator::Jump;
    case OP_JUMPI:
        return Terminator::JumpI;
    case OP_STOP:
        return Terminator::Stop;
    case OP_RETURN:
        return Terminator::Return;
    case OP_REVERT:
        return Terminator::Revert;
    case OP_SELFDESTRUCT:
        return Terminator::SelfDestruct;
    default:
        return Terminator::Invalid;
    }
}

struct BasicBlock
{
    size_t id = 0;
    size_t start_pc = 0;
    /// pc of the last instruction in the block.
    size_t end_pc = 0;
    /// Index of the first instruction in the source stream.
    size_t first_index = 0;
    std::vector<Instruction> instructions;
    Terminator terminator = Terminator::EndOfCode;

    bool starts_with_jumpdest() const noexcept
    {
        return !instructions.empty() && instructions.front().opcode == OP_JUMPDEST;
    }

    bool contains(uint8_t op) const noexcept
    {
        return std::any_of(instructions.begin(), instructions.end(),
            [op](const Instruction& i) { return i.opcode == op; });
    }
};

enum class EdgeKind
{
    Jump,
    ConditionalTaken,
    FallThrough,
};

constexpr std::string_view to_string(EdgeKind k) noexcept
{
    switch (k)
    {
    case EdgeKind::Jump:
        return "jump";
    case EdgeKind::ConditionalTaken:
        return "conditional-taken";
    case EdgeKind::FallThrough:
        return "fall-through";
    }
    return "?";
}

struct Edge
{
    size_t from = 0;
    size_t to = 0;
    EdgeKind kind = EdgeKind::FallThrough;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Cfg
{
    std::vector<BasicBlock> blocks;
    std::vector<Edge> edges;
    /// Blocks ending in JUMP/JUMPI whose target is not a constant JUMPDEST.
    std::vector<size_t> unresolved_jumps;

    std::vector<size_t> successors(size_t id) const
    {
        std::vector<size_t> out;
        for (const auto& e : edges)
            if (e.from == id)
                out.push_back(e.to);
        return out;
    }

    std::vector<size_t> predecessors(size_t id) const
    {
        std::vector<size_t> out;
        for (const auto& e : edges)
            if (e.to == id)
                out.push_back(e.from);
        return out;
    }

    std::optional<size_t> block_at_pc(size_t pc) const noexcept
    {
        const auto it = std::lower_bound(blocks.begin(), blocks.end(), pc,
            [](const BasicBlock& b, size_t v) { return b.start_pc < v; });
        if (it == blocks.end() || it->start_pc != pc)
            return std::nullopt;
        return it->id;
    }
};

/// Leaders: the first instruction, every JUMPDEST, and every instruction that
/// follows a terminator.
inline std::vector<BasicBlock> split_blocks(const InstructionStream& stream)
{
    std::vector<BasicBlock> blocks;
    const auto& ins = stream.instructions;
    BasicBlock current;
    bool open = false;

    auto close = [&](Terminator t) {
        current.terminator = t;
        current.end_pc = current.instructions.back().pc;
        current.id = blocks.size();
        blocks.push_back(std::move(current));
        current = BasicBlock{};
        open = false;
    };

    for (size_t i = 0; i < ins.size(); ++i)
    {
        if (ins[i].opcode == OP_JUMPDEST && open)
            close(Terminator::FallThrough);
        if (!open)
        {
            current.start_pc = ins[i].pc;
            current.first_index = i;
            open = true;
        }
        current.instructions.push_back(ins[i]);
        if (is_terminator(ins[i].opcode))
            close(terminator_of(ins[i].opcode));
    }
    if (open)
        close(Terminator::EndOfCode);
    return blocks;
}

inline Cfg resolve_edges(std::vector<BasicBlock> blocks)
{
    Cfg cfg;
    cfg.blocks = std::move(blocks);

    std::unordered_map<size_t, size_t> jumpdest_blocks;
    for (const auto& b : cfg.blocks)
        if (b.starts_with_jumpdest())
            jumpdest_blocks.emplace(b.start_pc, b.id);

    for (const auto& b : cfg.blocks)
    {
        const bool has_next = b.id + 1 < cfg.blocks.size();
        switch (b.terminator)
        {
        case Terminator::Jump:
        case Terminator::JumpI:
        {
            const auto kind =
                b.terminator == Terminator::Jump ? EdgeKind::Jump : EdgeKind::ConditionalTaken;
            std::optional<size_t> target;
            if (b.instructions.size() >= 2)
            {
                const auto& prev = b.instructions[b.instructions.size() - 2];
                if (const auto v = prev.push_value())
                {
                    const auto it = jumpdest_blocks.find(static_cast<size_t>(*v));
                    if (it != jumpdest_blocks.end())
                        target = it->second;
                }
            }
            if (target)
                cfg.edges.push_back({b.id, *target, kind});
            else
                cfg.unresolved_jumps.push_back(b.id);
            if (b.terminator == Terminator::JumpI && has_next)
                cfg.edges.push_back({b.id, b.id + 1, EdgeKind::FallThrough});
            break;
        }
        case Terminator::FallThrough:
        case Terminator::EndOfCode:
            if (has_next)
                cfg.edges.push_back({b.id, b.id + 1, EdgeKind::FallThrough});
            break;
        default:
            break;
        }
    }
    return cfg;
}

inline Cfg build_cfg(const InstructionStream& stream)
{
    return resolve_edges(split_blocks(stream));
}

namespace detail
{
inline std::string dot_escape(std::string_view s)
{
    std::string out;
    for (const char c : s)
    {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    return out;
}
}  // namespace detail

/// Graphviz rendering. Node labels are the block's normalized mnemonics,
/// one per line, wrapped in brackets. Output depends only on `cfg`.
inline std::string to_dot(const Cfg& cfg, std::string_view graph_name = "cfg")
{
    std::string out = "digraph " + std::string(graph_name) + " {\n";
    if (!cfg.blocks.empty())
        out += "  node [shape=box, fontname=\"monospace\"];\n";
    for (const auto& b : cfg.blocks)
    {
        std::string label = "[";
        for (size_t i = 0; i < b.instructions.size(); ++i)
        {
            if (i != 0)
                label += "\\n";
            label += detail::dot_escape(normalize(b.instructions[i].opcode).name());
        }
        label += "]";
        out += "  b" + std::to_string(b.id) + " [label=\"" + label + "\"];\n";
    }
    for (const auto& e : cfg.edges)
    {
        out += "  b" + std::to_string(e.from) + " -> b" + std::to_string(e.to) + " [label=\"" +
               std::string(to_string(e.kind)) + "\"];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace evmscan
