// Independent reference implementations used by the unit and acceptance
// suites. These deliberately avoid the library's opcode tables and work from
// raw byte values.
#pragma once

#include "evmscan/evmscan.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracle
{
/// Immediate width straight from the byte ranges: 0x60..0x7f carry 1..32 bytes.
inline size_t push_width(uint8_t b)
{
    return (b >= 0x60 && b <= 0x7f) ? static_cast<size_t>(b - 0x5f) : 0;
}

/// Byte offsets at which instructions begin, computed by a plain scan.
inline std::vector<size_t> instruction_offsets(const evmscan::Bytes& code)
{
    std::vector<size_t> out;
    for (size_t pc = 0; pc < code.size(); pc += 1 + push_width(code[pc]))
        out.push_back(pc);
    return out;
}

/// Returns an empty string when the stream tiles `code` and re-serializes to
/// it; otherwise a description of the first violation.
inline std::string check_tiling(const evmscan::Bytes& code, const evmscan::InstructionStream& s)
{
    size_t pc = 0;
    size_t total = 0;
    for (size_t i = 0; i < s.instructions.size(); ++i)
    {
        const auto& ins = s.instructions[i];
        if (ins.pc != pc)
            return "instruction " + std::to_string(i) + " at pc " + std::to_string(ins.pc) + ", expected " +
                   std::to_string(pc);
        if (ins.opcode != code[pc])
            return "opcode mismatch at pc " + std::to_string(pc);
        const size_t want = push_width(code[pc]);
        const size_t avail = code.size() - pc - 1;
        const size_t got = ins.immediate.size();
        if (got != std::min(want, avail) || ins.truncated != (want > avail))
            return "immediate mismatch at pc " + std::to_string(pc);
        pc += 1 + got;
        total += 1 + got;
    }
    if (total != code.size())
        return "tiling covers " + std::to_string(total) + " of " + std::to_string(code.size()) + " bytes";
    if (evmscan::serialize(s) != code)
        return "round-trip mismatch";
    return {};
}

/// Assigned opcodes, written out as byte ranges.
inline bool assigned(uint8_t b)
{
    return b <= 0x0b || (b >= 0x10 && b <= 0x1d) || b == 0x20 || (b >= 0x30 && b <= 0x48) ||
           (b >= 0x50 && b <= 0x5d) || (b >= 0x5f && b <= 0xa4) || (b >= 0xf0 && b <= 0xf5) || b == 0xfa ||
           b >= 0xfd;
}

inline bool ends_block(uint8_t b)
{
    switch (b)
    {
    case 0x00:  // STOP
    case 0x56:  // JUMP
    case 0x57:  // JUMPI
    case 0xf3:  // RETURN
    case 0xfd:  // REVERT
    case 0xfe:  // INVALID
    case 0xff:  // SELFDESTRUCT
        return true;
    default:
        return !assigned(b);
    }
}

/// Instruction indices that start a block.
inline std::set<size_t> leaders(const evmscan::InstructionStream& s)
{
    std::set<size_t> out;
    for (size_t i = 0; i < s.instructions.size(); ++i)
    {
        if (i == 0 || s.instructions[i].opcode == 0x5b || ends_block(s.instructions[i - 1].opcode))
            out.insert(i);
    }
    return out;
}

/// Empty string when block boundaries equal the leader set and every edge
/// invariant holds.
inline std::string check_cfg(const evmscan::InstructionStream& s, const evmscan::Cfg& cfg)
{
    using namespace evmscan;
    std::set<size_t> starts;
    std::vector<Instruction> flat;
    for (size_t id = 0; id < cfg.blocks.size(); ++id)
    {
        const auto& b = cfg.blocks[id];
        if (b.id != id || b.instructions.empty())
            return "block " + std::to_string(id) + " malformed";
        starts.insert(b.first_index);
        if (b.first_index != flat.size())
            return "block " + std::to_string(id) + " does not continue the partition";
        for (size_t k = 0; k + 1 < b.instructions.size(); ++k)
            if (ends_block(b.instructions[k].opcode))
                return "terminator inside block " + std::to_string(id);
        flat.insert(flat.end(), b.instructions.begin(), b.instructions.end());
    }
    if (flat.size() != s.instructions.size())
        return "partition length mismatch";
    for (size_t i = 0; i < flat.size(); ++i)
        if (flat[i].pc != s.instructions[i].pc || flat[i].opcode != s.instructions[i].opcode)
            return "partition differs at instruction " + std::to_string(i);
    if (starts != leaders(s))
        return "block boundaries differ from leader oracle";

    std::vector<size_t> out_jump(cfg.blocks.size()), out_all(cfg.blocks.size());
    for (const auto& e : cfg.edges)
    {
        if (e.from >= cfg.blocks.size() || e.to >= cfg.blocks.size())
            return "edge references a missing block";
        const auto& from = cfg.blocks[e.from];
        const auto& to = cfg.blocks[e.to];
        ++out_all[e.from];
        if (e.kind == EdgeKind::FallThrough)
        {
            if (e.to != e.from + 1)
                return "fall-through edge skips blocks";
            const uint8_t last = from.instructions.back().opcode;
            if (last != 0x57 && ends_block(last))
                return "fall-through after unconditional terminator";
            continue;
        }
        ++out_jump[e.from];
        if (to.instructions.front().opcode != 0x5b)
            return "jump edge to non-JUMPDEST block";
        const uint8_t last = from.instructions.back().opcode;
        if ((e.kind == EdgeKind::Jump) != (last == 0x56) || (e.kind == EdgeKind::ConditionalTaken) != (last == 0x57))
            return "edge kind does not match terminator";
        if (from.instructions.size() < 2)
            return "resolved jump without a PUSH";
        const auto v = from.instructions[from.instructions.size() - 2].push_value();
        if (!v || *v != to.start_pc)
            return "resolved jump target differs from PUSH value";
    }
    std::set<size_t> jumpdest_pcs;
    for (const auto& ins : s.instructions)
        if (ins.opcode == 0x5b)
            jumpdest_pcs.insert(ins.pc);
    std::vector<size_t> out_fall(cfg.blocks.size());
    for (const auto& e : cfg.edges)
        out_fall[e.from] += e.kind == EdgeKind::FallThrough ? 1 : 0;

    for (const auto& b : cfg.blocks)
    {
        const uint8_t last = b.instructions.back().opcode;
        const bool has_next = b.id + 1 < cfg.blocks.size();
        const bool wants_fall = has_next && (last == 0x57 || !ends_block(last));
        if (out_fall[b.id] != (wants_fall ? 1u : 0u))
            return "block " + std::to_string(b.id) + " has the wrong fall-through edges";
        if (last == 0x56 || last == 0x57)
        {
            // Resolvable iff a complete PUSH whose value fits 64 bits names a JUMPDEST.
            bool resolvable = false;
            if (b.instructions.size() >= 2)
            {
                const auto& p = b.instructions[b.instructions.size() - 2];
                if (p.opcode >= 0x5f && p.opcode <= 0x7f && !p.truncated)
                {
                    const size_t n = p.immediate.size();
                    bool fits = true;
                    uint64_t v = 0;
                    for (size_t k = 0; k < n; ++k)
                    {
                        if (k + 8 < n)
                            fits = fits && p.immediate[k] == 0;
                        else
                            v = (v << 8) | p.immediate[k];
                    }
                    resolvable = fits && jumpdest_pcs.count(v) != 0;
                }
            }
            if (resolvable != (out_jump[b.id] == 1))
                return "jump block " + std::to_string(b.id) + " resolution differs from oracle";
        }
        if (last == 0x56 && out_all[b.id] > 1)
            return "JUMP block with out-degree > 1";
        if (last == 0x57 && out_all[b.id] > 2)
            return "JUMPI block with out-degree > 2";
        const bool is_jump = last == 0x56 || last == 0x57;
        const bool unresolved =
            std::find(cfg.unresolved_jumps.begin(), cfg.unresolved_jumps.end(), b.id) != cfg.unresolved_jumps.end();
        if (is_jump && (out_jump[b.id] == 1) == unresolved)
            return "jump block " + std::to_string(b.id) + " neither resolved nor listed as unresolved";
        if (!is_jump && unresolved)
            return "non-jump block listed as unresolved";
    }
    return {};
}

/// Random instruction streams biased toward control flow, so that jumps,
/// JUMPDESTs and resolvable targets are common.
inline evmscan::Bytes random_control_flow_code(evmscan::SplitMix64& rng, size_t max_instructions)
{
    static constexpr uint8_t kOps[] = {0x00, 0x01, 0x02, 0x10, 0x14, 0x15, 0x42, 0x50, 0x54, 0x55, 0x56, 0x57,
        0x5b, 0x5b, 0x80, 0x81, 0x90, 0xf1, 0xf3, 0xfd, 0xfe, 0xff, 0x0c, 0xef, 0x5f};
    const size_t n = 1 + rng.below(max_instructions);
    evmscan::Bytes code;
    for (size_t i = 0; i < n; ++i)
    {
        const auto r = rng.below(10);
        if (r < 3)
        {
            // PUSH1, PUSH2 or PUSH32 with a small target, often a real
            // JUMPDEST offset.
            const auto w = rng.below(10);
            const size_t width = w < 6 ? 1 : (w < 9 ? 2 : 32);
            code.push_back(static_cast<uint8_t>(0x5f + width));
            const auto target = static_cast<uint8_t>(rng.below(code.size() + 8));
            for (size_t k = 0; k + 1 < width; ++k)
                code.push_back(0x00);
            code.push_back(target);
        }
        else
        {
            code.push_back(kOps[rng.below(std::size(kOps))]);
        }
    }
    return code;
}

inline evmscan::Bytes random_bytes(evmscan::SplitMix64& rng, size_t max_len)
{
    evmscan::Bytes out(rng.below(max_len + 1));
    for (auto& b : out)
        b = static_cast<uint8_t>(rng.next());
    return out;
}

/// Single-head attention weights straight from the definition, for
/// cross-checking the library kernel.
inline evmscan::MatrixD softmax_scores(const evmscan::MatrixD& q, const evmscan::MatrixD& k)
{
    evmscan::MatrixD out(q.rows(), k.rows());
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    for (size_t i = 0; i < q.rows(); ++i)
    {
        std::vector<double> s(k.rows());
        double mx = -1e300;
        for (size_t j = 0; j < k.rows(); ++j)
        {
            double dot = 0.0;
            for (size_t c = 0; c < q.cols(); ++c)
                dot += q(i, c) * k(j, c);
            s[j] = dot * scale;
            mx = std::max(mx, s[j]);
        }
        double z = 0.0;
        for (auto& v : s)
            z += (v = std::exp(v - mx));
        for (size_t j = 0; j < k.rows(); ++j)
            out(i, j) = s[j] / z;
    }
    return out;
}

}  // namespace oracle
