#include "../support/oracles.hpp"

#include <gtest/gtest.h>

using namespace evmscan;

TEST(ParseHex, EmptyPrefixOnly)
{
    EXPECT_TRUE(parse_hex("0x").bytes.empty());
    EXPECT_TRUE(parse_hex("").bytes.empty());
}

TEST(ParseHex, SingleByte)
{
    EXPECT_EQ(parse_hex("0xFF").bytes, Bytes{0xFF});
    EXPECT_EQ(parse_hex("ff").bytes, Bytes{0xFF});
}

TEST(ParseHex, SeveralBytes)
{
    EXPECT_EQ(parse_hex("0x6001600201").bytes, (Bytes{0x60, 0x01, 0x60, 0x02, 0x01}));
}

TEST(ParseHex, SurroundingWhitespaceIgnored)
{
    EXPECT_EQ(parse_hex("  0X6001\n").bytes, (Bytes{0x60, 0x01}));
}

TEST(ParseHex, RejectsOddLengthAndBadDigits)
{
    EXPECT_THROW(parse_hex("0x123"), MalformedHex);
    EXPECT_THROW(parse_hex("0xZZ"), MalformedHex);
    EXPECT_THROW(parse_hex("60 01"), MalformedHex);
}

TEST(ParseHex, ToHexInverse)
{
    const Bytes b{0x00, 0xab, 0x10};
    EXPECT_EQ(to_hex(b), "0x00ab10");
    EXPECT_EQ(parse_hex(to_hex(b)).bytes, b);
}

TEST(Disassemble, PushPushAdd)
{
    const auto s = disassemble(Bytes{0x60, 0x01, 0x60, 0x02, 0x01});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.instructions[0].mnemonic, "PUSH1");
    EXPECT_EQ(s.instructions[0].pc, 0u);
    EXPECT_EQ(s.instructions[0].immediate, Bytes{0x01});
    EXPECT_EQ(s.instructions[1].mnemonic, "PUSH1");
    EXPECT_EQ(s.instructions[1].pc, 2u);
    EXPECT_EQ(s.instructions[1].immediate, Bytes{0x02});
    EXPECT_EQ(s.instructions[2].mnemonic, "ADD");
    EXPECT_EQ(s.instructions[2].pc, 4u);
}

TEST(Disassemble, Empty)
{
    EXPECT_TRUE(disassemble(Bytes{}).empty());
}

TEST(Disassemble, TruncatedPushKeptAndFlagged)
{
    const auto s = disassemble(Bytes{0x61, 0xAA});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.instructions[0].mnemonic, "PUSH2");
    EXPECT_EQ(s.instructions[0].immediate, Bytes{0xAA});
    EXPECT_TRUE(s.instructions[0].truncated);
    EXPECT_FALSE(s.instructions[0].push_value().has_value());
    EXPECT_EQ(oracle::check_tiling(Bytes{0x61, 0xAA}, s), "");
}

TEST(Disassemble, SelfDestruct)
{
    const auto s = disassemble(Bytes{0xFF});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.instructions[0].mnemonic, "SELFDESTRUCT");
}

TEST(Disassemble, UnassignedBytesDecodeAsInvalid)
{
    const auto s = disassemble(Bytes{0x0c, 0xef, 0x5e, 0x49});
    ASSERT_EQ(s.size(), 4u);
    for (const auto& ins : s.instructions)
        EXPECT_EQ(ins.mnemonic, "INVALID");
}

TEST(Disassemble, PushValues)
{
    const auto s = disassemble(parse_hex("0x5f61010000").bytes);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.instructions[0].push_value(), 0u);
    EXPECT_EQ(s.instructions[1].push_value(), 0x0100u);
    EXPECT_FALSE(s.instructions[2].push_value().has_value());
}

TEST(Disassemble, WidePushValueOnlyWhenItFits)
{
    Bytes code{0x7f};
    code.resize(33, 0x00);
    code.back() = 0x2a;
    EXPECT_EQ(disassemble(code).instructions[0].push_value(), 0x2au);
    code[1] = 0x01;
    EXPECT_FALSE(disassemble(code).instructions[0].push_value().has_value());
}

TEST(Disassemble, ListingShowsPcsAndImmediates)
{
    const auto text = format_listing(disassemble(Bytes{0x60, 0x01, 0x00}));
    EXPECT_NE(text.find("PUSH1 0x01"), std::string::npos);
    EXPECT_NE(text.find("STOP"), std::string::npos);
}

TEST(Disassemble, RandomTilingAndRoundTrip)
{
    SplitMix64 rng(11);
    for (int i = 0; i < 500; ++i)
    {
        const auto code = oracle::random_bytes(rng, 512);
        const auto s = disassemble(code);
        ASSERT_EQ(oracle::check_tiling(code, s), "") << to_hex(code);
        std::vector<size_t> pcs;
        for (const auto& ins : s.instructions)
            pcs.push_back(ins.pc);
        ASSERT_EQ(pcs, oracle::instruction_offsets(code));
    }
}

TEST(Opcodes, AliasesResolveToCanonicalBytes)
{
    EXPECT_EQ(opcode_from_name("SUICIDE"), uint8_t{0xff});
    EXPECT_EQ(opcode_from_name("SELFDESTRUCT"), uint8_t{0xff});
    EXPECT_EQ(opcode_from_name("KECCAK256"), uint8_t{0x20});
    EXPECT_EQ(opcode_from_name("PREVRANDAO"), uint8_t{0x44});
    EXPECT_FALSE(opcode_from_name("NOPE").has_value());
}

TEST(Opcodes, TableAgreesWithByteRanges)
{
    for (int b = 0; b < 256; ++b)
    {
        const auto op = static_cast<uint8_t>(b);
        EXPECT_EQ(is_defined(op), oracle::assigned(op)) << b;
        EXPECT_EQ(immediate_size(op), oracle::push_width(op)) << b;
        EXPECT_EQ(is_terminator(op), oracle::ends_block(op)) << b;
    }
}
