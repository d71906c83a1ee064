// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "errors.hpp"
#include "vocabulary.hpp"

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace evmscan
{
using OpcodeSequence = std::vector<NormalizedOpcode>;

/// Document frequencies over a training corpus.
struct CorpusStats
{
    size_t doc_count = 0;
    std::array<size_t, kVocabSize> df{};

    /// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
    double idf(size_t k) const noexcept
    {
        return std::log((1.0 + static_cast<double>(doc_count)) /
                        (1.0 + static_cast<double>(df[k]))) +
               1.0;
    }

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

struct TfIdfVector
{
    std::array<double, kVocabSize> values{};

    double operator[](size_t k) const noexcept { return values[k]; }
    double operator[](NormalizedOpcode op) const noexcept { return values[op.index]; }
};

inline CorpusStats fit_corpus_stats(std::span<const OpcodeSequence> docs)
{
    if (docs.empty())
        throw EmptyCorpus("cannot fit document frequencies on zero documents");

    CorpusStats stats;
    stats.doc_count = docs.size();
    for (const auto& doc : docs)
    {
        std::array<bool, kVocabSize> seen{};
        for (const auto op : doc)
            seen[op.index] = true;
        for (size_t k = 0; k < kVocabSize; ++k)
            stats.df[k] += seen[k] ? 1 : 0;
    }
    return stats;
}

/// tf is relative frequency within the document; an empty document gives zeros.
inline TfIdfVector tfidf_vector(std::span<const NormalizedOpcode> doc, const CorpusStats& stats)
{
    TfIdfVector v;
    if (doc.empty())
        return v;

    std::array<size_t, kVocabSize> counts{};
    for (const auto op : doc)
        ++counts[op.index];

    const auto len = static_cast<double>(doc.size());
    for (size_t k = 0; k < kVocabSize; ++k)
    {
        if (counts[k] != 0)
            v.values[k] = (static_cast<double>(counts[k]) / len) * stats.idf(k);
    }
    return v;
}

}  // namespace evmscan
