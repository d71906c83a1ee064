// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disasm.hpp"
#include "opcodes.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace evmscan
{
inline constexpr size_t kVocabSize = 80;

/// Normalized opcode symbols in index order. Generated from data/vocabulary.txt.
inline constexpr std::array<std::string_view, kVocabSize> kVocabulary = {
#include "evmscan/vocabulary_table.inc"
};

namespace detail
{
consteval bool vocabulary_well_formed()
{
    for (size_t i = 0; i < kVocabSize; ++i)
    {
        if (kVocabulary[i].empty())
            return false;
        for (size_t j = 0; j < i; ++j)
            if (kVocabulary[i] == kVocabulary[j])
                return false;
    }
    return true;
}

consteval size_t vocab_index(std::string_view name)
{
    for (size_t i = 0; i < kVocabSize; ++i)
        if (kVocabulary[i] == name)
            return i;
    throw "symbol missing from vocabulary";
}
}  // namespace detail

static_assert(detail::vocabulary_well_formed(), "vocabulary must hold 80 distinct symbols");

/// FNV-1a over the vocabulary file bytes (one symbol per line, '\n' terminated).
/// Model bundles record it so a mismatched table is caught on load.
constexpr uint64_t vocabulary_checksum() noexcept
{
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](char c) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ull;
    };
    for (const auto name : kVocabulary)
    {
        for (const char c : name)
            mix(c);
        mix('\n');
    }
    return h;
}

struct NormalizedOpcode
{
    uint8_t index = 0;

    constexpr std::string_view name() const noexcept { return kVocabulary[index]; }
    friend constexpr bool operator==(NormalizedOpcode, NormalizedOpcode) = default;
};

namespace sym
{
inline constexpr NormalizedOpcode ADD{detail::vocab_index("ADD")};
inline constexpr NormalizedOpcode SUB{detail::vocab_index("SUB")};
inline constexpr NormalizedOpcode MUL{detail::vocab_index("MUL")};
inline constexpr NormalizedOpcode DIV{detail::vocab_index("DIV")};
inline constexpr NormalizedOpcode STOP{detail::vocab_index("STOP")};
inline constexpr NormalizedOpcode TIMESTAMP{detail::vocab_index("TIMESTAMP")};
inline constexpr NormalizedOpcode SSTORE{detail::vocab_index("SSTORE")};
inline constexpr NormalizedOpcode CALL{detail::vocab_index("CALL")};
inline constexpr NormalizedOpcode DELEGATECALL{detail::vocab_index("DELEGATECALL")};
inline constexpr NormalizedOpcode SELFDESTRUCT{detail::vocab_index("SELFDESTRUCT")};
inline constexpr NormalizedOpcode PUSH{detail::vocab_index("PUSH")};
inline constexpr NormalizedOpcode DUP{detail::vocab_index("DUP")};
inline constexpr NormalizedOpcode SWAP{detail::vocab_index("SWAP")};
inline constexpr NormalizedOpcode LOG{detail::vocab_index("LOG")};
inline constexpr NormalizedOpcode INVALID{detail::vocab_index("INVALID")};
}  // namespace sym

namespace detail
{
// "PUSH17" -> 17; nullopt unless `name` is prefix followed by a decimal in [lo, hi].
constexpr std::optional<unsigned> family_member(
    std::string_view name, std::string_view prefix, unsigned lo, unsigned hi) noexcept
{
    if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix)
        return std::nullopt;
    const auto digits = name.substr(prefix.size());
    if (digits.size() > 2 || (digits.size() == 2 && digits[0] == '0'))
        return std::nullopt;
    unsigned v = 0;
    for (const char c : digits)
    {
        if (c < '0' || c > '9')
            return std::nullopt;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    if (v < lo || v > hi)
        return std::nullopt;
    return v;
}
}  // namespace detail

/// Collapses PUSHn/DUPn/SWAPn/LOGn into their family symbol; other canonical
/// mnemonics map to themselves and anything unknown maps to INVALID.
constexpr NormalizedOpcode normalize(std::string_view mnemonic) noexcept
{
    if (detail::family_member(mnemonic, "PUSH", 0, 32))
        return sym::PUSH;
    if (detail::family_member(mnemonic, "DUP", 1, 16))
        return sym::DUP;
    if (detail::family_member(mnemonic, "SWAP", 1, 16))
        return sym::SWAP;
    if (detail::family_member(mnemonic, "LOG", 0, 4))
        return sym::LOG;
    if (mnemonic == "SUICIDE")
        return sym::SELFDESTRUCT;
    if (mnemonic == "KECCAK256")
        mnemonic = "SHA3";
    else if (mnemonic == "PREVRANDAO")
        mnemonic = "DIFFICULTY";
    for (size_t i = 0; i < kVocabSize; ++i)
        if (kVocabulary[i] == mnemonic)
            return NormalizedOpcode{static_cast<uint8_t>(i)};
    return sym::INVALID;
}

namespace detail
{
consteval std::array<NormalizedOpcode, 256> make_byte_normalizer()
{
    std::array<NormalizedOpcode, 256> t{};
    for (size_t op = 0; op < 256; ++op)
        t[op] = normalize(kMnemonics[op]);
    return t;
}
inline constexpr auto kByteNormalizer = make_byte_normalizer();
}  // namespace detail

constexpr NormalizedOpcode normalize(uint8_t opcode) noexcept
{
    return detail::kByteNormalizer[opcode];
}

inline std::vector<NormalizedOpcode> normalize_stream(const InstructionStream& stream)
{
    std::vector<NormalizedOpcode> out;
    out.reserve(stream.size());
    for (const auto& ins : stream.instructions)
        out.push_back(normalize(ins.opcode));
    return out;
}

// Encoder token ids: 0..79 are vocabulary symbols, followed by three specials.
using TokenId = uint16_t;
inline constexpr TokenId kPadToken = kVocabSize;
inline constexpr TokenId kSepToken = kVocabSize + 1;
inline constexpr TokenId kUnkToken = kVocabSize + 2;
inline constexpr size_t kTokenVocabSize = kVocabSize + 3;

constexpr TokenId to_token(NormalizedOpcode op) noexcept
{
    return op.index;
}

constexpr std::string_view token_name(TokenId id) noexcept
{
    if (id < kVocabSize)
        return kVocabulary[id];
    switch (id)
    {
    case kPadToken:
        return "PAD";
    case kSepToken:
        return "SEP";
    default:
        return "UNK";
    }
}

/// Token name lookup used when reading fragment dumps; unknown names are UNK.
constexpr TokenId token_from_name(std::string_view name) noexcept
{
    if (name == "PAD")
        return kPadToken;
    if (name == "SEP")
        return kSepToken;
    for (size_t i = 0; i < kVocabSize; ++i)
        if (kVocabulary[i] == name)
            return static_cast<TokenId>(i);
    return kUnkToken;
}

}  // namespace evmscan
