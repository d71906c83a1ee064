#include "evmscan/evmscan.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace evmscan;

TEST(Synth, EveryClassHasBothLabelsFromEight)
{
    const auto corpus = generate_synthetic_corpus(8, 11);
    ASSERT_EQ(corpus.size(), 8u);
    for (const auto cls : kAllVulnClasses)
    {
        const auto pos = std::count_if(corpus.begin(), corpus.end(), [&](const auto& c) { return c.labels.has(cls); });
        EXPECT_GE(pos, 1) << to_string(cls);
        EXPECT_LE(pos, 7) << to_string(cls);
    }
}

TEST(Synth, SelfDestructPositivesCarryTheOpcode)
{
    for (const auto& c : generate_synthetic_corpus(40, 5))
        if (c.labels.has(VulnClass::SD))
        {
            const auto s = disassemble(c.code);
            EXPECT_TRUE(std::any_of(s.instructions.begin(), s.instructions.end(),
                [](const Instruction& i) { return i.opcode == 0xff; }))
                << c.id;
        }
}

TEST(Synth, PositivesYieldFragmentsOfTheirClass)
{
    for (const auto& c : generate_synthetic_corpus(40, 6))
    {
        const auto frags = extract_all_fragments(build_cfg(disassemble(c.code)));
        for (const auto cls : kAllVulnClasses)
            if (c.labels.has(cls))
            {
                EXPECT_FALSE(frags[index_of(cls)].empty()) << c.id << ' ' << to_string(cls);
            }
    }
}

TEST(Synth, SameSeedSameBytes)
{
    const auto a = generate_synthetic_corpus(30, 99);
    const auto b = generate_synthetic_corpus(30, 99);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i)
    {
        EXPECT_EQ(a[i].id, b[i].id);
        EXPECT_EQ(a[i].code, b[i].code);
        EXPECT_EQ(a[i].labels, b[i].labels);
    }
    const auto c = generate_synthetic_corpus(30, 100);
    EXPECT_NE(a[10].code, c[10].code);
}

TEST(Synth, TargetSizeReached)
{
    SynthOptions opt;
    opt.target_instructions = 3000;
    for (const auto& c : generate_synthetic_corpus(8, 2, opt))
        EXPECT_GE(disassemble(c.code).instructions.size(), 3000u);
}

TEST(Synth, TooFewContracts)
{
    EXPECT_THROW(generate_synthetic_corpus(7, 1), ConfigError);
}
