// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "corpus.hpp"
#include "fragments.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace evmscan
{
inline constexpr double kDecisionThreshold = 0.5;

struct ConfusionCounts
{
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    size_t tn = 0;

    size_t total() const noexcept { return tp + fp + fn + tn; }
};

/// Precision, recall and F1. A zero denominator yields 0 and sets the
/// matching `*_degenerate` flag.
struct ClassMetrics
{
    ConfusionCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

/// Harmonic mean of precision and recall; 0 (flagged) when both are 0.
inline double f1_score(double precision, double recall, bool* degenerate = nullptr)
{
    if (precision + recall <= 0.0)
    {
        if (degenerate)
            *degenerate = true;
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

inline ClassMetrics compute_metrics(const ConfusionCounts& c)
{
    ClassMetrics m;
    m.counts = c;
    if (c.tp + c.fp == 0)
        m.precision_degenerate = true;
    else
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn == 0)
        m.recall_degenerate = true;
    else
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    m.f1 = f1_score(m.precision, m.recall, &m.f1_degenerate);
    return m;
}

/// Mean analysis time for contracts whose instruction count is below `upper`.
struct TimingBucket
{
    size_t upper = 0;
    size_t count = 0;
    double mean_instructions = 0.0;
    double mean_seconds = 0.0;
};

struct EvalReport
{
    std::array<ClassMetrics, kNumVulnClasses> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    size_t n_contracts = 0;
    double mean_seconds = 0.0;
    std::vector<TimingBucket> timing;

    const ClassMetrics& operator[](VulnClass c) const noexcept { return per_class[index_of(c)]; }
};

inline constexpr std::array<size_t, 5> kDefaultTimingBuckets = {500, 1000, 2500, 5000, 10000};

/// Groups (instruction count, seconds) samples into buckets with the given
/// upper bounds; samples above the last bound form a final open bucket.
inline std::vector<TimingBucket> bucket_timings(std::span<const size_t> instructions,
    std::span<const double> seconds, std::span<const size_t> bounds = kDefaultTimingBuckets)
{
    std::vector<TimingBucket> out;
    for (const auto b : bounds)
        out.push_back({b, 0, 0.0, 0.0});
    out.push_back({SIZE_MAX, 0, 0.0, 0.0});
    for (size_t i = 0; i < instructions.size(); ++i)
    {
        auto& b = *std::find_if(out.begin(), out.end(), [&](const TimingBucket& t) { return instructions[i] <= t.upper; });
        ++b.count;
        b.mean_instructions += static_cast<double>(instructions[i]);
        b.mean_seconds += seconds[i];
    }
    std::erase_if(out, [](const TimingBucket& b) { return b.count == 0; });
    for (auto& b : out)
    {
        b.mean_instructions /= static_cast<double>(b.count);
        b.mean_seconds /= static_cast<double>(b.count);
    }
    return out;
}

/// Scores probabilities[i][class] against labels at the 0.5 threshold.
inline EvalReport evaluate_predictions(std::span<const std::array<double, kNumVulnClasses>> probabilities,
    std::span<const LabelSet> labels)
{
    EvalReport r;
    r.n_contracts = labels.size();
    std::array<ConfusionCounts, kNumVulnClasses> counts{};
    for (size_t i = 0; i < labels.size(); ++i)
    {
        for (const auto cls : kAllVulnClasses)
        {
            const bool predicted = probabilities[i][index_of(cls)] >= kDecisionThreshold;
            const bool actual = labels[i].has(cls);
            auto& c = counts[index_of(cls)];
            if (predicted && actual)
                ++c.tp;
            else if (predicted)
                ++c.fp;
            else if (actual)
                ++c.fn;
            else
                ++c.tn;
        }
    }
    for (size_t k = 0; k < kNumVulnClasses; ++k)
    {
        r.per_class[k] = compute_metrics(counts[k]);
        r.macro_precision += r.per_class[k].precision / kNumVulnClasses;
        r.macro_recall += r.per_class[k].recall / kNumVulnClasses;
        r.macro_f1 += r.per_class[k].f1 / kNumVulnClasses;
    }
    return r;
}

inline std::string format_report(const EvalReport& r)
{
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-5s %5s %5s %5s %5s %9s %9s %9s\n", "class", "TP", "FP", "FN", "TN",
        "precision", "recall", "F1");
    out += line;
    for (const auto cls : kAllVulnClasses)
    {
        const auto& m = r[cls];
        std::snprintf(line, sizeof line, "%-5s %5zu %5zu %5zu %5zu %9.4f %9.4f %9.4f%s\n",
            std::string(to_string(cls)).c_str(), m.counts.tp, m.counts.fp, m.counts.fn, m.counts.tn,
            m.precision, m.recall, m.f1,
            (m.precision_degenerate || m.recall_degenerate || m.f1_degenerate) ? "  (degenerate)" : "");
        out += line;
    }
    std::snprintf(line, sizeof line, "%-5s %23s %9.4f %9.4f %9.4f\n", "macro", "", r.macro_precision,
        r.macro_recall, r.macro_f1);
    out += line;
    std::snprintf(line, sizeof line, "contracts: %zu, mean analysis time: %.6f s\n", r.n_contracts, r.mean_seconds);
    out += line;
    for (const auto& b : r.timing)
    {
        if (b.upper == SIZE_MAX)
            std::snprintf(line, sizeof line, "  > last bound: %zu contracts, %.0f instr avg, %.6f s\n", b.count,
                b.mean_instructions, b.mean_seconds);
        else
            std::snprintf(line, sizeof line, "  <= %zu instr: %zu contracts, %.0f instr avg, %.6f s\n", b.upper,
                b.count, b.mean_instructions, b.mean_seconds);
        out += line;
    }
    return out;
}

}  // namespace evmscan
