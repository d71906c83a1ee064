// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "errors.hpp"
#include "opcodes.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evmscan
{
using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

struct RawBytecode
{
    Bytes bytes;
    std::string source_id;
};

struct Instruction
{
    size_t pc = 0;
    uint8_t opcode = 0;
    std::string_view mnemonic = kInvalidMnemonic;
    Bytes immediate;
    /// Set on a trailing PUSHn whose immediate runs past the end of code.
    bool truncated = false;

    size_t size() const noexcept { return 1 + immediate.size(); }

    /// Big-endian value of the immediate if it fits in 64 bits. PUSH0 is 0.
    std::optional<uint64_t> push_value() const noexcept
    {
        if (!is_push(opcode) || truncated)
            return std::nullopt;
        uint64_t v = 0;
        for (const auto b : immediate)
        {
            if (v >> 56)
                return std::nullopt;
            v = (v << 8) | b;
        }
        return v;
    }

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct InstructionStream
{
    std::vector<Instruction> instructions;
    std::string source_id;

    size_t size() const noexcept { return instructions.size(); }
    bool empty() const noexcept { return instructions.empty(); }
};

namespace detail
{
constexpr int hex_digit(char c) noexcept
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

constexpr bool is_space(char c) noexcept
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace detail

/// Decodes optionally 0x-prefixed hex text. Surrounding whitespace is ignored.
inline RawBytecode parse_hex(std::string_view text, std::string source_id = {})
{
    while (!text.empty() && detail::is_space(text.front()))
        text.remove_prefix(1);
    while (!text.empty() && detail::is_space(text.back()))
        text.remove_suffix(1);
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
        text.remove_prefix(2);

    if (text.size() % 2 != 0)
        throw MalformedHex("odd number of hex digits (" + std::to_string(text.size()) + ")");

    RawBytecode code;
    code.source_id = std::move(source_id);
    code.bytes.reserve(text.size() / 2);
    for (size_t i = 0; i < text.size(); i += 2)
    {
        const int hi = detail::hex_digit(text[i]);
        const int lo = detail::hex_digit(text[i + 1]);
        if (hi < 0 || lo < 0)
        {
            const size_t bad = hi < 0 ? i : i + 1;
            throw MalformedHex("non-hex character at offset " + std::to_string(bad));
        }
        code.bytes.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return code;
}

inline std::string to_hex(BytesView bytes, bool prefix = true)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s = prefix ? "0x" : "";
    s.reserve(s.size() + 2 * bytes.size());
    for (const auto b : bytes)
    {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

/// Total decoding: every byte sequence yields a stream that tiles the input.
inline InstructionStream disassemble(BytesView code, std::string source_id = {})
{
    InstructionStream stream;
    stream.source_id = std::move(source_id);
    stream.instructions.reserve(code.size());

    size_t pc = 0;
    while (pc < code.size())
    {
        Instruction ins;
        ins.pc = pc;
        ins.opcode = code[pc];
        ins.mnemonic = mnemonic(ins.opcode);
        const size_t want = immediate_size(ins.opcode);
        const size_t have = std::min(want, code.size() - pc - 1);
        ins.immediate.assign(code.begin() + static_cast<ptrdiff_t>(pc + 1),
            code.begin() + static_cast<ptrdiff_t>(pc + 1 + have));
        ins.truncated = have < want;
        pc += 1 + have;
        stream.instructions.push_back(std::move(ins));
    }
    return stream;
}

inline InstructionStream disassemble(const RawBytecode& code)
{
    return disassemble(code.bytes, code.source_id);
}

/// Inverse of disassemble.
inline Bytes serialize(const InstructionStream& stream)
{
    Bytes out;
    for (const auto& ins : stream.instructions)
    {
        out.push_back(ins.opcode);
        out.insert(out.end(), ins.immediate.begin(), ins.immediate.end());
    }
    return out;
}

/// One instruction per line: "pc: MNEMONIC 0ximm".
inline std::string format_listing(const InstructionStream& stream)
{
    std::string out;
    for (const auto& ins : stream.instructions)
    {
        out += std::to_string(ins.pc);
        out += ": ";
        out += ins.mnemonic;
        if (immediate_size(ins.opcode) != 0)
        {
            out += ' ';
            out += to_hex(ins.immediate);
        }
        if (ins.truncated)
            out += " (truncated)";
        out += '\n';
    }
    return out;
}

}  // namespace evmscan
