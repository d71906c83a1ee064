// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace evmscan
{
/// Opcode bytes the analysis refers to by name.
enum Opcode : uint8_t
{
    OP_STOP = 0x00,
    OP_ADD = 0x01,
    OP_MUL = 0x02,
    OP_SUB = 0x03,
    OP_DIV = 0x04,
    OP_SDIV = 0x05,
    OP_MOD = 0x06,
    OP_EXP = 0x0a,
    OP_LT = 0x10,
    OP_GT = 0x11,
    OP_SLT = 0x12,
    OP_SGT = 0x13,
    OP_EQ = 0x14,
    OP_ISZERO = 0x15,
    OP_AND = 0x16,
    OP_OR = 0x17,
    OP_XOR = 0x18,
    OP_NOT = 0x19,
    OP_SHL = 0x1b,
    OP_SHR = 0x1c,
    OP_SHA3 = 0x20,
    OP_ADDRESS = 0x30,
    OP_BALANCE = 0x31,
    OP_CALLER = 0x33,
    OP_CALLVALUE = 0x34,
    OP_CALLDATALOAD = 0x35,
    OP_CALLDATASIZE = 0x36,
    OP_TIMESTAMP = 0x42,
    OP_NUMBER = 0x43,
    OP_POP = 0x50,
    OP_MLOAD = 0x51,
    OP_MSTORE = 0x52,
    OP_SLOAD = 0x54,
    OP_SSTORE = 0x55,
    OP_JUMP = 0x56,
    OP_JUMPI = 0x57,
    OP_GAS = 0x5a,
    OP_JUMPDEST = 0x5b,
    OP_TLOAD = 0x5c,
    OP_TSTORE = 0x5d,
    OP_PUSH0 = 0x5f,
    OP_PUSH1 = 0x60,
    OP_PUSH2 = 0x61,
    OP_PUSH4 = 0x63,
    OP_PUSH32 = 0x7f,
    OP_DUP1 = 0x80,
    OP_DUP16 = 0x8f,
    OP_SWAP1 = 0x90,
    OP_SWAP16 = 0x9f,
    OP_LOG0 = 0xa0,
    OP_LOG1 = 0xa1,
    OP_LOG4 = 0xa4,
    OP_CREATE = 0xf0,
    OP_CALL = 0xf1,
    OP_CALLCODE = 0xf2,
    OP_RETURN = 0xf3,
    OP_DELEGATECALL = 0xf4,
    OP_CREATE2 = 0xf5,
    OP_STATICCALL = 0xfa,
    OP_REVERT = 0xfd,
    OP_INVALID = 0xfe,
    OP_SELFDESTRUCT = 0xff,
};

inline constexpr std::string_view kInvalidMnemonic = "INVALID";

namespace detail
{
inline constexpr std::array<std::string_view, 32> kPushNames = {"PUSH1", "PUSH2", "PUSH3",
    "PUSH4", "PUSH5", "PUSH6", "PUSH7", "PUSH8", "PUSH9", "PUSH10", "PUSH11", "PUSH12", "PUSH13",
    "PUSH14", "PUSH15", "PUSH16", "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22",
    "PUSH23", "PUSH24", "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31",
    "PUSH32"};
inline constexpr std::array<std::string_view, 16> kDupNames = {"DUP1", "DUP2", "DUP3", "DUP4",
    "DUP5", "DUP6", "DUP7", "DUP8", "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15",
    "DUP16"};
inline constexpr std::array<std::string_view, 16> kSwapNames = {"SWAP1", "SWAP2", "SWAP3",
    "SWAP4", "SWAP5", "SWAP6", "SWAP7", "SWAP8", "SWAP9", "SWAP10", "SWAP11", "SWAP12", "SWAP13",
    "SWAP14", "SWAP15", "SWAP16"};
inline constexpr std::array<std::string_view, 5> kLogNames = {"LOG0", "LOG1", "LOG2", "LOG3",
    "LOG4"};

// The canonical table: London opcodes, Shanghai PUSH0 and the transient
// storage pair TLOAD/TSTORE. Every other byte decodes as INVALID.
consteval std::array<std::string_view, 256> make_mnemonic_table()
{
    std::array<std::string_view, 256> t{};
    for (auto& n : t)
        n = kInvalidMnemonic;

    t[0x00] = "STOP";
    t[0x01] = "ADD";
    t[0x02] = "MUL";
    t[0x03] = "SUB";
    t[0x04] = "DIV";
    t[0x05] = "SDIV";
    t[0x06] = "MOD";
    t[0x07] = "SMOD";
    t[0x08] = "ADDMOD";
    t[0x09] = "MULMOD";
    t[0x0a] = "EXP";
    t[0x0b] = "SIGNEXTEND";

    t[0x10] = "LT";
    t[0x11] = "GT";
    t[0x12] = "SLT";
    t[0x13] = "SGT";
    t[0x14] = "EQ";
    t[0x15] = "ISZERO";
    t[0x16] = "AND";
    t[0x17] = "OR";
    t[0x18] = "XOR";
    t[0x19] = "NOT";
    t[0x1a] = "BYTE";
    t[0x1b] = "SHL";
    t[0x1c] = "SHR";
    t[0x1d] = "SAR";

    t[0x20] = "SHA3";

    t[0x30] = "ADDRESS";
    t[0x31] = "BALANCE";
    t[0x32] = "ORIGIN";
    t[0x33] = "CALLER";
    t[0x34] = "CALLVALUE";
    t[0x35] = "CALLDATALOAD";
    t[0x36] = "CALLDATASIZE";
    t[0x37] = "CALLDATACOPY";
    t[0x38] = "CODESIZE";
    t[0x39] = "CODECOPY";
    t[0x3a] = "GASPRICE";
    t[0x3b] = "EXTCODESIZE";
    t[0x3c] = "EXTCODECOPY";
    t[0x3d] = "RETURNDATASIZE";
    t[0x3e] = "RETURNDATACOPY";
    t[0x3f] = "EXTCODEHASH";

    t[0x40] = "BLOCKHASH";
    t[0x41] = "COINBASE";
    t[0x42] = "TIMESTAMP";
    t[0x43] = "NUMBER";
    t[0x44] = "DIFFICULTY";
    t[0x45] = "GASLIMIT";
    t[0x46] = "CHAINID";
    t[0x47] = "SELFBALANCE";
    t[0x48] = "BASEFEE";

    t[0x50] = "POP";
    t[0x51] = "MLOAD";
    t[0x52] = "MSTORE";
    t[0x53] = "MSTORE8";
    t[0x54] = "SLOAD";
    t[0x55] = "SSTORE";
    t[0x56] = "JUMP";
    t[0x57] = "JUMPI";
    t[0x58] = "PC";
    t[0x59] = "MSIZE";
    t[0x5a] = "GAS";
    t[0x5b] = "JUMPDEST";
    t[0x5c] = "TLOAD";
    t[0x5d] = "TSTORE";
    t[0x5f] = "PUSH0";

    for (size_t i = 0; i < 32; ++i)
        t[0x60 + i] = kPushNames[i];
    for (size_t i = 0; i < 16; ++i)
    {
        t[0x80 + i] = kDupNames[i];
        t[0x90 + i] = kSwapNames[i];
    }
    for (size_t i = 0; i < 5; ++i)
        t[0xa0 + i] = kLogNames[i];

    t[0xf0] = "CREATE";
    t[0xf1] = "CALL";
    t[0xf2] = "CALLCODE";
    t[0xf3] = "RETURN";
    t[0xf4] = "DELEGATECALL";
    t[0xf5] = "CREATE2";
    t[0xfa] = "STATICCALL";
    t[0xfd] = "REVERT";
    t[0xfe] = "INVALID";
    t[0xff] = "SELFDESTRUCT";
    return t;
}
}  // namespace detail

inline constexpr auto kMnemonics = detail::make_mnemonic_table();

constexpr std::string_view mnemonic(uint8_t op) noexcept
{
    return kMnemonics[op];
}

/// True for bytes that have a canonical meaning (0xFE counts: it is the
/// designated INVALID instruction).
constexpr bool is_defined(uint8_t op) noexcept
{
    return op == OP_INVALID || kMnemonics[op] != kInvalidMnemonic;
}

/// Number of immediate bytes following the opcode (PUSH1..PUSH32).
constexpr size_t immediate_size(uint8_t op) noexcept
{
    return (op >= OP_PUSH1 && op <= OP_PUSH32) ? size_t{op} - (OP_PUSH1 - 1) : 0;
}

constexpr bool is_push(uint8_t op) noexcept
{
    return op >= OP_PUSH0 && op <= OP_PUSH32;
}

constexpr bool is_dup(uint8_t op) noexcept
{
    return op >= OP_DUP1 && op <= OP_DUP16;
}

/// Instructions that end a basic block.
constexpr bool is_terminator(uint8_t op) noexcept
{
    switch (op)
    {
    case OP_JUMP:
    case OP_JUMPI:
    case OP_STOP:
    case OP_RETURN:
    case OP_REVERT:
    case OP_SELFDESTRUCT:
        return true;
    default:
        return !is_defined(op) || op == OP_INVALID;
    }
}

/// Reverse lookup. Accepts the legacy aliases SUICIDE, KECCAK256 and
/// PREVRANDAO. INVALID maps to 0xFE.
inline std::optional<uint8_t> opcode_from_name(std::string_view name) noexcept
{
    if (name == "SUICIDE")
        return OP_SELFDESTRUCT;
    if (name == "KECCAK256")
        return OP_SHA3;
    if (name == "PREVRANDAO")
        return uint8_t{0x44};
    for (size_t op = 0; op < 256; ++op)
    {
        if (kMnemonics[op] == name && (kMnemonics[op] != kInvalidMnemonic || op == OP_INVALID))
            return static_cast<uint8_t>(op);
    }
    return std::nullopt;
}

}  // namespace evmscan
