// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cfg.hpp"
#include "common.hpp"
#include "disasm.hpp"
#include "encoder.hpp"
#include "errors.hpp"
#include "fragments.hpp"
#include "tfidf.hpp"

#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace evmscan
{
/// Which feature groups reach the classifier.
enum class FeatureMode
{
    TfIdf,  ///< 80 opcode statistics only
    Cfg,    ///< per-class fragment embeddings only
    Full,   ///< both, concatenated
};

constexpr std::string_view to_string(FeatureMode m) noexcept
{
    switch (m)
    {
    case FeatureMode::TfIdf:
        return "tfidf";
    case FeatureMode::Cfg:
        return "cfg";
    case FeatureMode::Full:
        return "full";
    }
    return "?";
}

inline std::optional<FeatureMode> feature_mode_from_string(std::string_view s) noexcept
{
    if (s == "tfidf")
        return FeatureMode::TfIdf;
    if (s == "cfg")
        return FeatureMode::Cfg;
    if (s == "full")
        return FeatureMode::Full;
    return std::nullopt;
}

constexpr size_t feature_dimension(FeatureMode mode, size_t d_model) noexcept
{
    switch (mode)
    {
    case FeatureMode::TfIdf:
        return kVocabSize;
    case FeatureMode::Cfg:
        return kNumVulnClasses * d_model;
    case FeatureMode::Full:
        return kVocabSize + kNumVulnClasses * d_model;
    }
    return 0;
}

/// Precomputed per-fragment embeddings, one line each:
///   contract-id class seed-block-id v_1 ... v_d   (whitespace separated)
class EmbeddingTable
{
public:
    static EmbeddingTable parse(std::string_view text, size_t d_model)
    {
        EmbeddingTable t;
        t.d_model_ = d_model;
        std::istringstream is{std::string(text)};
        std::string line;
        size_t line_no = 0;
        while (std::getline(is, line))
        {
            ++line_no;
            if (line.empty() || line[0] == '#')
                continue;
            std::istringstream ls(line);
            std::string id, cls_name;
            size_t seed = 0;
            if (!(ls >> id >> cls_name >> seed))
                throw WeightFormatError("embedding table line " + std::to_string(line_no) + ": bad key");
            const auto cls = vuln_class_from_string(cls_name);
            if (!cls)
                throw WeightFormatError("embedding table line " + std::to_string(line_no) + ": unknown class");
            EmbeddingVector v;
            double x = 0.0;
            while (ls >> x)
                v.push_back(x);
            if (!ls.eof() || v.size() != d_model)
                throw WeightFormatError("embedding table line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(d_model) + " values");
            t.rows_[{id, *cls, seed}] = std::move(v);
        }
        return t;
    }

    static EmbeddingTable load(const std::string& path, size_t d_model)
    {
        std::string text;
        if (!read_file(path, text))
            throw WeightFormatError("cannot read embedding table " + path);
        return parse(text, d_model);
    }

    size_t d_model() const noexcept { return d_model_; }
    size_t size() const noexcept { return rows_.size(); }

    const EmbeddingVector* find(const std::string& id, VulnClass cls, size_t seed) const
    {
        const auto it = rows_.find({id, cls, seed});
        return it == rows_.end() ? nullptr : &it->second;
    }

private:
    size_t d_model_ = 0;
    std::map<std::tuple<std::string, VulnClass, size_t>, EmbeddingVector> rows_;
};

/// Turns fragments into vectors, either by running the encoder or by looking
/// up precomputed rows.
class FragmentEmbedder
{
public:
    explicit FragmentEmbedder(EncoderWeights weights) : weights_(std::move(weights)) {}
    FragmentEmbedder(EncoderWeights weights, EmbeddingTable table)
      : weights_(std::move(weights)), table_(std::move(table))
    {
        if (table_->d_model() != weights_.config.d_model)
            throw ConfigError("embedding table width differs from encoder d_model");
    }

    const EncoderConfig& config() const noexcept { return weights_.config; }
    size_t d_model() const noexcept { return weights_.config.d_model; }
    const EncoderWeights& weights() const noexcept { return weights_; }
    bool uses_table() const noexcept { return table_.has_value(); }

    EmbeddingVector embed(const std::string& contract_id, const Fragment& frag) const
    {
        if (table_)
        {
            if (const auto* row = table_->find(contract_id, frag.vuln_class, frag.seed_block))
                return *row;
            throw WeightFormatError("no precomputed embedding for " + contract_id + " " +
                                    std::string(to_string(frag.vuln_class)) + " block " +
                                    std::to_string(frag.seed_block));
        }
        return encode(fragment_tokens(frag, weights_.config.max_len), weights_);
    }

private:
    EncoderWeights weights_;
    std::optional<EmbeddingTable> table_;
};

/// Everything derived from one contract's bytes before corpus statistics are
/// known.
struct ContractAnalysis
{
    InstructionStream stream;
    Cfg cfg;
    std::array<std::vector<Fragment>, kNumVulnClasses> fragments;
    OpcodeSequence opcodes;
    /// Mean fragment embedding per class; zero when the class has no fragment.
    std::array<EmbeddingVector, kNumVulnClasses> embeddings;
};

/// `contract_id` keys embedding-table lookups; it defaults to the source id.
inline ContractAnalysis analyze(
    const RawBytecode& code, const FragmentEmbedder& embedder, const std::string& contract_id = {})
{
    const auto& id = contract_id.empty() ? code.source_id : contract_id;
    ContractAnalysis a;
    a.stream = disassemble(code);
    a.opcodes = normalize_stream(a.stream);
    a.cfg = build_cfg(a.stream);
    a.fragments = extract_all_fragments(a.cfg);
    for (const auto cls : kAllVulnClasses)
    {
        auto& pooled = a.embeddings[index_of(cls)];
        pooled.assign(embedder.d_model(), 0.0);
        const auto& frags = a.fragments[index_of(cls)];
        if (frags.empty())
            continue;
        for (const auto& f : frags)
        {
            const auto e = embedder.embed(id, f);
            for (size_t j = 0; j < pooled.size(); ++j)
                pooled[j] += e[j];
        }
        for (auto& v : pooled)
            v /= static_cast<double>(frags.size());
    }
    return a;
}

struct FeatureVector
{
    TfIdfVector tfidf;
    std::array<EmbeddingVector, kNumVulnClasses> embeddings;

    /// Concatenation of the groups selected by `mode`: tf-idf first, then the
    /// class embeddings in RV, AV, SD, TDV order.
    std::vector<double> fused(FeatureMode mode = FeatureMode::Full) const
    {
        std::vector<double> out;
        if (mode != FeatureMode::Cfg)
            out.insert(out.end(), tfidf.values.begin(), tfidf.values.end());
        if (mode != FeatureMode::TfIdf)
            for (const auto& e : embeddings)
                out.insert(out.end(), e.begin(), e.end());
        return out;
    }
};

inline FeatureVector features_of(const ContractAnalysis& a, const CorpusStats& stats)
{
    return {tfidf_vector(a.opcodes, stats), a.embeddings};
}

/// Full per-contract featurization: disassembly, tf-idf, CFG, fragments,
/// encoding and per-class pooling.
inline FeatureVector featurize(const RawBytecode& code, const CorpusStats& stats,
    const FragmentEmbedder& embedder, const std::string& contract_id = {})
{
    return features_of(analyze(code, embedder, contract_id), stats);
}

}  // namespace evmscan
