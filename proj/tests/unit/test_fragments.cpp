#include "../support/oracles.hpp"

#include <gtest/gtest.h>

using namespace evmscan;

namespace
{
Cfg cfg_of(const Bytes& code)
{
    return build_cfg(disassemble(code));
}

std::vector<TokenId> tokens_of(std::initializer_list<std::string_view> names)
{
    std::vector<TokenId> out;
    for (const auto n : names)
        out.push_back(token_from_name(n));
    return out;
}

// Dispatcher: selector -> "fn", a second selector -> "fn2"; fallback reverts.
Bytes dispatcher_fixture(bool two_selectors)
{
    Assembler a;
    a.push(0).op(OP_CALLDATALOAD).push(0xe0).op(OP_SHR);
    a.op(OP_DUP1).push_n(0xA9059CBB, 4).op(OP_EQ).push_label("fn").op(OP_JUMPI);
    if (two_selectors)
        a.op(OP_DUP1).push_n(0x095EA7B3, 4).op(OP_EQ).push_label("fn2").op(OP_JUMPI);
    a.push(0).op(OP_DUP1).op(OP_REVERT);
    a.label("fn").op(OP_CALLER).op(OP_SELFDESTRUCT);
    if (two_selectors)
        a.label("fn2").op(OP_TIMESTAMP).push(0).op(OP_SSTORE).op(OP_STOP);
    return a.assemble();
}
}  // namespace

TEST(Selectors, SingleEntry)
{
    const auto cfg = cfg_of(dispatcher_fixture(false));
    const auto sels = extract_selectors(cfg);
    ASSERT_EQ(sels.size(), 1u);
    EXPECT_EQ(sels[0].value(), 0xA9059CBBu);
    EXPECT_EQ(sels[0].hex(), "0xa9059cbb");
    // The entry must be the block that starts at the JUMPDEST the dispatcher pushes.
    const auto& b = cfg.blocks[sels[0].entry_block];
    EXPECT_TRUE(b.starts_with_jumpdest());
    EXPECT_TRUE(b.contains(OP_SELFDESTRUCT));
}

TEST(Selectors, NoPush4MeansNone)
{
    EXPECT_TRUE(extract_selectors(cfg_of(parse_hex("0x6003565b00").bytes)).empty());
}

TEST(Selectors, TwoEntriesInOneChain)
{
    const auto sels = extract_selectors(cfg_of(dispatcher_fixture(true)));
    ASSERT_EQ(sels.size(), 2u);
    EXPECT_EQ(sels[0].value(), 0xA9059CBBu);
    EXPECT_EQ(sels[1].value(), 0x095EA7B3u);
}

TEST(MatchFragments, SelfDestructBlockWithNeighbors)
{
    // PUSH1 0x00, SELFDESTRUCT
    const auto cfg = cfg_of(parse_hex("0x6000ff").bytes);
    const auto frags = match_fragments(cfg, VulnClass::SD);
    ASSERT_EQ(frags.size(), 1u);
    EXPECT_EQ(frags[0].seed_block, 0u);
    EXPECT_EQ(frags[0].tokens, tokens_of({"PUSH", "SELFDESTRUCT"}));

    const auto cfg2 = cfg_of(dispatcher_fixture(false));
    const auto f2 = match_fragments(cfg2, VulnClass::SD);
    ASSERT_EQ(f2.size(), 1u);
    // Seed plus its dispatcher predecessor.
    EXPECT_EQ(f2[0].block_ids.size(), 2u);
}

TEST(MatchFragments, NoTimestampNoTdv)
{
    EXPECT_TRUE(match_fragments(cfg_of(dispatcher_fixture(false)), VulnClass::TDV).empty());
}

TEST(MatchFragments, CallThenStoreInSuccessor)
{
    // CALL, PUSH1 0x06, JUMPI, JUMPDEST... : block0 = [GAS CALL PUSH JUMPI], block1 = [SSTORE STOP]
    Assembler a;
    a.op(OP_GAS).op(OP_CALL).push_label("x").op(OP_JUMPI);
    a.op(OP_SSTORE).op(OP_STOP);
    a.label("x").op(OP_STOP);
    const auto cfg = cfg_of(a.assemble());
    const auto frags = match_fragments(cfg, VulnClass::RV);
    ASSERT_EQ(frags.size(), 1u);
    EXPECT_EQ(frags[0].seed_block, 0u);
    const auto& ids = frags[0].block_ids;
    EXPECT_NE(std::find(ids.begin(), ids.end(), 1u), ids.end());

    // Exhaustive check: the seed's distance-1 neighborhood holds an SSTORE.
    bool reach = false;
    for (const auto s : cfg.successors(0))
        reach = reach || cfg.blocks[s].contains(OP_SSTORE);
    EXPECT_TRUE(reach);
}

TEST(MatchFragments, StoreBeforeCallIsNotReentrancy)
{
    Assembler a;
    a.op(OP_SSTORE).op(OP_GAS).op(OP_CALL).op(OP_STOP);
    EXPECT_TRUE(match_fragments(cfg_of(a.assemble()), VulnClass::RV).empty());
    Assembler b;
    b.op(OP_GAS).op(OP_DELEGATECALL).op(OP_SSTORE).op(OP_STOP);
    EXPECT_EQ(match_fragments(cfg_of(b.assemble()), VulnClass::RV).size(), 1u);
}

TEST(MatchFragments, ArithmeticSeeds)
{
    for (const uint8_t op : {OP_ADD, OP_SUB, OP_MUL, OP_DIV})
        EXPECT_EQ(match_fragments(cfg_of(Bytes{op, 0x00}), VulnClass::AV).size(), 1u);
    EXPECT_TRUE(match_fragments(cfg_of(Bytes{OP_SDIV, 0x00}), VulnClass::AV).empty());
}

TEST(FragmentTokens, SingleBlock)
{
    const auto frags = match_fragments(cfg_of(parse_hex("0x600142").bytes), VulnClass::TDV);
    ASSERT_EQ(frags.size(), 1u);
    EXPECT_EQ(fragment_tokens(frags[0], 512), tokens_of({"PUSH", "TIMESTAMP"}));
}

TEST(FragmentTokens, BlocksJoinedBySep)
{
    // [CALL JUMPDEST-less fall-through], [JUMPDEST SSTORE STOP] via FallThrough
    Assembler a;
    a.op(OP_CALL).label("next").op(OP_SSTORE).op(OP_STOP);
    const auto frags = match_fragments(cfg_of(a.assemble()), VulnClass::RV);
    ASSERT_EQ(frags.size(), 1u);
    EXPECT_EQ(frags[0].tokens, tokens_of({"CALL", "SEP", "JUMPDEST", "SSTORE", "STOP"}));
}

TEST(FragmentTokens, TruncatedToMaxLen)
{
    Fragment f;
    f.tokens.assign(600, to_token(sym::ADD));
    f.tokens[511] = to_token(sym::MUL);
    const auto t = fragment_tokens(f, 512);
    ASSERT_EQ(t.size(), 512u);
    EXPECT_EQ(t.back(), to_token(sym::MUL));
    EXPECT_EQ(fragment_tokens(f, 1000).size(), 600u);
}

TEST(Fragments, SelectorAnnotation)
{
    const auto cfg = cfg_of(dispatcher_fixture(true));
    const auto all = extract_all_fragments(cfg);
    const auto& sd = all[index_of(VulnClass::SD)];
    const auto& tdv = all[index_of(VulnClass::TDV)];
    ASSERT_EQ(sd.size(), 1u);
    ASSERT_EQ(tdv.size(), 1u);
    ASSERT_TRUE(sd[0].selector.has_value());
    EXPECT_EQ(sd[0].selector->value(), 0xA9059CBBu);
    ASSERT_TRUE(tdv[0].selector.has_value());
    EXPECT_EQ(tdv[0].selector->value(), 0x095EA7B3u);
}

TEST(Fragments, PropertiesOnRandomStreams)
{
    SplitMix64 rng(17);
    for (int n = 0; n < 300; ++n)
    {
        const auto cfg = cfg_of(oracle::random_control_flow_code(rng, 60));
        const auto all = extract_all_fragments(cfg);
        for (const auto cls : kAllVulnClasses)
        {
            const auto& frags = all[index_of(cls)];
            std::vector<size_t> seeds;
            for (const auto& f : frags)
            {
                seeds.push_back(f.seed_block);
                const auto& seed = cfg.blocks[f.seed_block];
                // Soundness per class.
                if (cls == VulnClass::SD)
                {
                    EXPECT_TRUE(seed.contains(OP_SELFDESTRUCT));
                }
                if (cls == VulnClass::TDV)
                {
                    EXPECT_TRUE(seed.contains(OP_TIMESTAMP));
                }
                if (cls == VulnClass::AV)
                {
                    EXPECT_TRUE(seed.contains(OP_ADD) || seed.contains(OP_SUB) || seed.contains(OP_MUL) ||
                                seed.contains(OP_DIV));
                }
                // Neighborhood bound: each member is the seed or adjacent to it.
                const auto succ = cfg.successors(f.seed_block);
                const auto pred = cfg.predecessors(f.seed_block);
                for (const auto id : f.block_ids)
                {
                    const bool near = id == f.seed_block ||
                                      std::find(succ.begin(), succ.end(), id) != succ.end() ||
                                      std::find(pred.begin(), pred.end(), id) != pred.end();
                    EXPECT_TRUE(near);
                }
                EXPECT_TRUE(std::is_sorted(f.block_ids.begin(), f.block_ids.end()));
            }
            EXPECT_TRUE(std::is_sorted(seeds.begin(), seeds.end()));
            EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
            // Completeness on seeds for the single-opcode triggers.
            if (cls == VulnClass::SD || cls == VulnClass::TDV)
            {
                const uint8_t trigger = cls == VulnClass::SD ? OP_SELFDESTRUCT : OP_TIMESTAMP;
                size_t expected = 0;
                for (const auto& b : cfg.blocks)
                    expected += b.contains(trigger) ? 1 : 0;
                EXPECT_EQ(frags.size(), expected);
            }
        }
        // Same Cfg, same fragments.
        const auto again = extract_all_fragments(cfg);
        for (size_t k = 0; k < kNumVulnClasses; ++k)
        {
            ASSERT_EQ(again[k].size(), all[k].size());
            for (size_t i = 0; i < all[k].size(); ++i)
                EXPECT_EQ(again[k][i].tokens, all[k][i].tokens);
        }
    }
}

TEST(FragmentRecord, FormatAndParse)
{
    const auto cfg = cfg_of(parse_hex("0x6000ff").bytes);
    const auto frags = match_fragments(cfg, VulnClass::SD);
    const auto line = format_fragment_record("c1", frags[0], 512);
    EXPECT_EQ(line, "c1\tSD\t0\tPUSH SELFDESTRUCT");
    const auto rec = parse_fragment_record(line);
    ASSERT_TRUE(rec.has_value());
    EXPECT_EQ(rec->contract_id, "c1");
    EXPECT_EQ(rec->vuln_class, VulnClass::SD);
    EXPECT_EQ(rec->seed_block, 0u);
    EXPECT_EQ(rec->tokens, frags[0].tokens);
}

TEST(FragmentRecord, UnknownTokenBecomesUnk)
{
    const auto rec = parse_fragment_record("c2\tRV\t3\tCALL FROB SEP SSTORE");
    ASSERT_TRUE(rec.has_value());
    EXPECT_EQ(rec->tokens, (std::vector<TokenId>{to_token(sym::CALL), kUnkToken, kSepToken, to_token(sym::SSTORE)}));
}

TEST(FragmentRecord, MalformedLinesRejected)
{
    EXPECT_FALSE(parse_fragment_record("").has_value());
    EXPECT_FALSE(parse_fragment_record("c1\tSD").has_value());
    EXPECT_FALSE(parse_fragment_record("c1\tXX\t0\tSTOP").has_value());
    EXPECT_FALSE(parse_fragment_record("c1\tSD\tnope\tSTOP").has_value());
}

TEST(VulnClassNames, RaIsAnAliasForRv)
{
    EXPECT_EQ(vuln_class_from_string("RA"), VulnClass::RV);
    EXPECT_EQ(vuln_class_from_string("RV"), VulnClass::RV);
    EXPECT_FALSE(vuln_class_from_string("XX").has_value());
}
