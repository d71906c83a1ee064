#include "../support/oracles.hpp"

#include <gtest/gtest.h>

using namespace evmscan;

namespace
{
Cfg cfg_of(std::string_view hex)
{
    return build_cfg(disassemble(parse_hex(hex)));
}

bool has_edge(const Cfg& cfg, size_t from, size_t to, EdgeKind kind)
{
    return std::any_of(cfg.edges.begin(), cfg.edges.end(),
        [&](const Edge& e) { return e.from == from && e.to == to && e.kind == kind; });
}
}  // namespace

TEST(SplitBlocks, PushStop)
{
    // PUSH1 0x00, STOP
    const auto blocks = split_blocks(disassemble(parse_hex("0x600000")));
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_EQ(blocks[0].terminator, Terminator::Stop);
}

TEST(SplitBlocks, JumpOverInvalid)
{
    // PUSH1 0x04, JUMP, INVALID, JUMPDEST, STOP
    const auto s = disassemble(parse_hex("0x600456fe5b00"));
    const auto blocks = split_blocks(s);
    ASSERT_EQ(blocks.size(), 3u);
    EXPECT_EQ(blocks[0].instructions.size(), 2u);
    EXPECT_EQ(blocks[0].terminator, Terminator::Jump);
    EXPECT_EQ(blocks[1].instructions.size(), 1u);
    EXPECT_EQ(blocks[1].terminator, Terminator::Invalid);
    EXPECT_EQ(blocks[2].start_pc, 4u);
    EXPECT_TRUE(blocks[2].starts_with_jumpdest());
    EXPECT_EQ(blocks[2].terminator, Terminator::Stop);

    std::set<size_t> starts;
    for (const auto& b : blocks)
        starts.insert(b.first_index);
    EXPECT_EQ(starts, oracle::leaders(s));
}

TEST(SplitBlocks, NoTerminatorEndsAtEndOfCode)
{
    const auto s = disassemble(parse_hex("0x0102"));
    const auto blocks = split_blocks(s);
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_EQ(blocks[0].terminator, Terminator::EndOfCode);
    EXPECT_EQ(oracle::leaders(s), std::set<size_t>{0});
}

TEST(SplitBlocks, JumpdestOpensBlockWithFallThrough)
{
    const auto blocks = split_blocks(disassemble(parse_hex("0x01015b00")));
    ASSERT_EQ(blocks.size(), 2u);
    EXPECT_EQ(blocks[0].terminator, Terminator::FallThrough);
}

TEST(SplitBlocks, Empty)
{
    EXPECT_TRUE(split_blocks(InstructionStream{}).empty());
    EXPECT_TRUE(build_cfg(InstructionStream{}).edges.empty());
}

TEST(ResolveEdges, ConstantJump)
{
    // PUSH1 0x03, JUMP, JUMPDEST, STOP
    const auto cfg = cfg_of("0x6003565b00");
    ASSERT_EQ(cfg.blocks.size(), 2u);
    ASSERT_EQ(cfg.edges.size(), 1u);
    EXPECT_TRUE(has_edge(cfg, 0, 1, EdgeKind::Jump));
    EXPECT_TRUE(cfg.unresolved_jumps.empty());
}

TEST(ResolveEdges, ConditionalJump)
{
    // PUSH1 0x04, JUMPI, STOP, JUMPDEST, STOP. Block pcs are {0,2}, {3}, {4,5}.
    const auto s = disassemble(parse_hex("0x600457005b00"));
    const auto cfg = build_cfg(s);
    ASSERT_EQ(cfg.blocks.size(), 3u);
    EXPECT_EQ(cfg.blocks[1].start_pc, 3u);
    EXPECT_EQ(cfg.blocks[2].start_pc, 4u);
    EXPECT_TRUE(has_edge(cfg, 0, 2, EdgeKind::ConditionalTaken));
    EXPECT_TRUE(has_edge(cfg, 0, 1, EdgeKind::FallThrough));
    EXPECT_EQ(cfg.edges.size(), 2u);
    EXPECT_EQ(oracle::check_cfg(s, cfg), "");
}

TEST(ResolveEdges, TargetThatIsNotAJumpdestStaysUnresolved)
{
    // PUSH1 0x05, JUMPI, STOP, JUMPDEST, STOP: pc 5 is the final STOP.
    const auto cfg = cfg_of("0x600557005b00");
    EXPECT_FALSE(has_edge(cfg, 0, 2, EdgeKind::ConditionalTaken));
    EXPECT_TRUE(has_edge(cfg, 0, 1, EdgeKind::FallThrough));
    EXPECT_EQ(cfg.unresolved_jumps, std::vector<size_t>{0});
}

TEST(ResolveEdges, DynamicJumpUnresolved)
{
    // PUSH1 0x04, DUP1, JUMP, JUMPDEST, STOP
    const auto cfg = cfg_of("0x600480565b00");
    EXPECT_TRUE(cfg.edges.empty());
    EXPECT_EQ(cfg.unresolved_jumps, std::vector<size_t>{0});
}

TEST(ResolveEdges, TruncatedPushDoesNotResolve)
{
    const auto cfg = cfg_of("0x5b61");
    EXPECT_TRUE(cfg.unresolved_jumps.empty());
    EXPECT_EQ(cfg.blocks.size(), 1u);
}

TEST(Cfg, SuccessorsPredecessorsAndLookup)
{
    const auto cfg = cfg_of("0x600457005b00");
    EXPECT_EQ(cfg.successors(0), (std::vector<size_t>{2, 1}));
    EXPECT_EQ(cfg.predecessors(2), std::vector<size_t>{0});
    EXPECT_EQ(cfg.block_at_pc(4), 2u);
    EXPECT_FALSE(cfg.block_at_pc(5).has_value());
}

TEST(Cfg, RandomStreamsMatchLeaderOracle)
{
    SplitMix64 rng(5);
    for (int i = 0; i < 300; ++i)
    {
        const auto code = oracle::random_control_flow_code(rng, 50);
        const auto s = disassemble(code);
        ASSERT_EQ(oracle::check_cfg(s, build_cfg(s)), "") << to_hex(code);
    }
}

TEST(Cfg, RandomBytesMatchLeaderOracle)
{
    SplitMix64 rng(6);
    for (int i = 0; i < 300; ++i)
    {
        const auto code = oracle::random_bytes(rng, 200);
        const auto s = disassemble(code);
        ASSERT_EQ(oracle::check_cfg(s, build_cfg(s)), "") << to_hex(code);
    }
}

TEST(ToDot, EmptyGraph)
{
    EXPECT_EQ(to_dot(Cfg{}), "digraph cfg {\n}\n");
}

TEST(ToDot, SingleStopBlock)
{
    const auto dot = to_dot(cfg_of("0x00"));
    EXPECT_NE(dot.find("b0 [label=\"[STOP]\"];"), std::string::npos);
    EXPECT_EQ(dot.find("->"), std::string::npos);
}

TEST(ToDot, TwoBlocksWithJumpGolden)
{
    EXPECT_EQ(to_dot(cfg_of("0x6003565b00")),
        "digraph cfg {\n"
        "  node [shape=box, fontname=\"monospace\"];\n"
        "  b0 [label=\"[PUSH\\nJUMP]\"];\n"
        "  b1 [label=\"[JUMPDEST\\nSTOP]\"];\n"
        "  b0 -> b1 [label=\"jump\"];\n"
        "}\n");
}
