// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common.hpp"
#include "corpus.hpp"
#include "encoder.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "gbdt.hpp"
#include "metrics.hpp"
#include "tfidf.hpp"
#include "vocabulary.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace evmscan
{
inline constexpr std::string_view kBundleFormat = "evmscan.model/1";

/// Everything `scan` needs: feature configuration, corpus statistics, the
/// encoder reference and one ensemble per class.
///
/// The encoder is referenced, not embedded: either a weights file (path plus
/// FNV-1a checksum of its bytes) or, when no file is given, the config seed
/// that regenerates the initial weights.
struct ModelBundle
{
    FeatureMode mode = FeatureMode::Full;
    EncoderConfig encoder;
    std::string weights_path;
    uint64_t weights_checksum = 0;
    std::string embeddings_path;
    CorpusStats stats;
    gbdt::TrainConfig train_config;
    size_t feature_dim = 0;
    std::array<gbdt::Ensemble, kNumVulnClasses> models;
};

namespace detail
{
using nlohmann::json;

inline std::string hex64(uint64_t v)
{
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline uint64_t parse_hex64(const std::string& s)
{
    if (s.size() != 18 || s.compare(0, 2, "0x") != 0)
        throw BundleFormatError("bad checksum field '" + s + "'");
    uint64_t v = 0;
    for (size_t i = 2; i < s.size(); ++i)
    {
        const int d = hex_digit(s[i]);
        if (d < 0)
            throw BundleFormatError("bad checksum field '" + s + "'");
        v = (v << 4) | static_cast<uint64_t>(d);
    }
    return v;
}

inline json tree_to_json(const gbdt::DecisionTree& t)
{
    // Parallel arrays keep the file compact and diffable.
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         weight = json::array();
    for (const auto& n : t.nodes())
    {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        weight.push_back(n.weight);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"weight", weight}};
}

inline gbdt::DecisionTree tree_from_json(const json& j, size_t n_features)
{
    const auto& feature = j.at("feature");
    const size_t n = feature.size();
    if (n == 0 || j.at("threshold").size() != n || j.at("left").size() != n || j.at("right").size() != n ||
        j.at("weight").size() != n)
        throw BundleFormatError("tree arrays have inconsistent lengths");
    std::vector<gbdt::TreeNode> nodes(n);
    for (size_t i = 0; i < n; ++i)
    {
        auto& node = nodes[i];
        node.feature = feature[i].get<int>();
        node.threshold = j["threshold"][i].get<double>();
        node.left = j["left"][i].get<int>();
        node.right = j["right"][i].get<int>();
        node.weight = j["weight"][i].get<double>();
        if (node.is_leaf())
            continue;
        // Children must come later so evaluation cannot loop.
        const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
        if (static_cast<size_t>(node.feature) >= n_features || !in_range(node.left) || !in_range(node.right))
            throw BundleFormatError("tree node " + std::to_string(i) + " is malformed");
    }
    return gbdt::DecisionTree(std::move(nodes));
}

inline json train_config_to_json(const gbdt::TrainConfig& c)
{
    return {{"n_trees", c.n_trees}, {"learning_rate", c.learning_rate}, {"max_leaves", c.max_leaves},
        {"min_samples_leaf", c.min_samples_leaf}, {"leaf_penalty", c.leaf_penalty}, {"l2_weight", c.l2_weight},
        {"seed", c.seed}};
}

inline gbdt::TrainConfig train_config_from_json(const json& j)
{
    gbdt::TrainConfig c;
    c.n_trees = j.at("n_trees").get<size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.max_leaves = j.at("max_leaves").get<size_t>();
    c.min_samples_leaf = j.at("min_samples_leaf").get<size_t>();
    c.leaf_penalty = j.at("leaf_penalty").get<double>();
    c.l2_weight = j.at("l2_weight").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}
}  // namespace detail

inline nlohmann::json bundle_to_json(const ModelBundle& b)
{
    using nlohmann::json;
    json j;
    j["format"] = kBundleFormat;
    j["vocabulary_checksum"] = detail::hex64(vocabulary_checksum());
    j["features"] = {{"mode", to_string(b.mode)}, {"dimension", b.feature_dim}};
    j["encoder"] = {{"vocab_size", b.encoder.vocab_size}, {"d_model", b.encoder.d_model},
        {"n_layers", b.encoder.n_layers}, {"n_heads", b.encoder.n_heads}, {"max_len", b.encoder.max_len},
        {"seed", b.encoder.seed}, {"weights", b.weights_path},
        {"weights_checksum", detail::hex64(b.weights_checksum)}, {"embeddings", b.embeddings_path}};
    j["corpus_stats"] = {{"doc_count", b.stats.doc_count}, {"df", b.stats.df}};
    j["gbdt"] = detail::train_config_to_json(b.train_config);
    json models = json::object();
    for (const auto cls : kAllVulnClasses)
    {
        const auto& m = b.models[index_of(cls)];
        json trees = json::array();
        for (const auto& t : m.trees)
            trees.push_back(detail::tree_to_json(t));
        models[std::string(to_string(cls))] = {{"base_score", m.base_score}, {"trees", trees}};
    }
    j["models"] = models;
    return j;
}

inline ModelBundle bundle_from_json(const nlohmann::json& j)
{
    try
    {
        if (j.at("format").get<std::string>() != kBundleFormat)
            throw BundleFormatError("unsupported bundle format '" + j["format"].get<std::string>() + "'");
        if (detail::parse_hex64(j.at("vocabulary_checksum").get<std::string>()) != vocabulary_checksum())
            throw BundleFormatError("bundle was built against a different opcode vocabulary");

        ModelBundle b;
        const auto mode = feature_mode_from_string(j.at("features").at("mode").get<std::string>());
        if (!mode)
            throw BundleFormatError("unknown feature mode");
        b.mode = *mode;
        b.feature_dim = j["features"].at("dimension").get<size_t>();

        const auto& e = j.at("encoder");
        b.encoder.vocab_size = e.at("vocab_size").get<size_t>();
        b.encoder.d_model = e.at("d_model").get<size_t>();
        b.encoder.n_layers = e.at("n_layers").get<size_t>();
        b.encoder.n_heads = e.at("n_heads").get<size_t>();
        b.encoder.max_len = e.at("max_len").get<size_t>();
        b.encoder.seed = e.at("seed").get<uint64_t>();
        b.weights_path = e.at("weights").get<std::string>();
        b.weights_checksum = detail::parse_hex64(e.at("weights_checksum").get<std::string>());
        b.embeddings_path = e.at("embeddings").get<std::string>();
        try
        {
            b.encoder.validate();
        }
        catch (const ConfigError& err)
        {
            throw BundleFormatError(err.what());
        }
        if (b.feature_dim != feature_dimension(b.mode, b.encoder.d_model))
            throw BundleFormatError("feature dimension does not match mode and encoder width");

        const auto& s = j.at("corpus_stats");
        b.stats.doc_count = s.at("doc_count").get<size_t>();
        const auto df = s.at("df").get<std::vector<size_t>>();
        if (df.size() != kVocabSize)
            throw BundleFormatError("corpus_stats.df must have " + std::to_string(kVocabSize) + " entries");
        std::copy(df.begin(), df.end(), b.stats.df.begin());

        b.train_config = detail::train_config_from_json(j.at("gbdt"));
        for (const auto cls : kAllVulnClasses)
        {
            const auto& mj = j.at("models").at(std::string(to_string(cls)));
            auto& m = b.models[index_of(cls)];
            m.base_score = mj.at("base_score").get<double>();
            m.config = b.train_config;
            m.n_features = b.feature_dim;
            for (const auto& tj : mj.at("trees"))
                m.trees.push_back(detail::tree_from_json(tj, b.feature_dim));
        }
        return b;
    }
    catch (const nlohmann::json::exception& err)
    {
        throw BundleFormatError(std::string("malformed bundle: ") + err.what());
    }
}

/// Deterministic serialization: keys are sorted and doubles are written in
/// shortest round-trip form, so equal bundles give equal bytes.
inline std::string serialize_bundle(const ModelBundle& b)
{
    return bundle_to_json(b).dump(1) + "\n";
}

inline void save_bundle(const ModelBundle& b, const std::string& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw BundleFormatError("cannot write " + path);
    os << serialize_bundle(b);
    if (!os)
        throw BundleFormatError("write failed for " + path);
}

inline ModelBundle load_bundle(const std::string& path)
{
    std::string text;
    if (!read_file(path, text))
        throw BundleFormatError("cannot read " + path);
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& err)
    {
        throw BundleFormatError(path + ": " + err.what());
    }
    return bundle_from_json(j);
}

inline uint64_t file_checksum(const std::string& path)
{
    std::string bytes;
    if (!read_file(path, bytes))
        throw WeightFormatError("cannot read " + path);
    return fnv1a64(bytes);
}

/// Rebuilds the fragment embedder a bundle refers to, checking that a
/// referenced weights file still has the recorded contents.
inline FragmentEmbedder make_embedder(const ModelBundle& b)
{
    EncoderWeights w;
    if (b.weights_path.empty())
        w = init_weights(b.encoder);
    else
    {
        if (file_checksum(b.weights_path) != b.weights_checksum)
            throw WeightFormatError(b.weights_path + " changed since the model was trained");
        w = load_weights(b.weights_path, b.encoder);
        w.config.seed = b.encoder.seed;
    }
    if (b.embeddings_path.empty())
        return FragmentEmbedder(std::move(w));
    auto table = EmbeddingTable::load(b.embeddings_path, b.encoder.d_model);
    return FragmentEmbedder(std::move(w), std::move(table));
}

struct TrainOptions
{
    FeatureMode mode = FeatureMode::Full;
    EncoderConfig encoder;
    std::string weights_path;
    std::string embeddings_path;
    double split_ratio = 0.8;
    uint64_t split_seed = 0;
    gbdt::TrainConfig gbdt;
    size_t jobs = 1;
};

struct AnalyzedContract
{
    ContractAnalysis analysis;
    double seconds = 0.0;
};

/// Disassembles and encodes every contract, `jobs` at a time.
inline std::vector<AnalyzedContract> analyze_corpus(
    std::span<const LabeledContract> corpus, const FragmentEmbedder& embedder, size_t jobs)
{
    std::vector<AnalyzedContract> out(corpus.size());
    parallel_for(corpus.size(), jobs, [&](size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        out[i].analysis = analyze(read_bytecode(corpus[i].path), embedder, corpus[i].id);
        out[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    return out;
}

inline MatrixD feature_matrix(std::span<const FeatureVector> features, FeatureMode mode, size_t dim)
{
    MatrixD x(features.size(), dim);
    for (size_t i = 0; i < features.size(); ++i)
    {
        const auto row = features[i].fused(mode);
        if (row.size() != dim)
            throw FeatureDimError("fused feature width " + std::to_string(row.size()) + " differs from " +
                                  std::to_string(dim));
        std::copy(row.begin(), row.end(), x.row(i).begin());
    }
    return x;
}

/// Probabilities for every class, plus per-contract timing for featurize and
/// predict together.
struct Predictions
{
    std::vector<std::array<double, kNumVulnClasses>> probabilities;
    std::vector<size_t> instructions;
    std::vector<double> seconds;
};

inline Predictions predict_corpus(
    const ModelBundle& b, std::span<const LabeledContract> corpus, const FragmentEmbedder& embedder, size_t jobs)
{
    Predictions p;
    p.probabilities.resize(corpus.size());
    p.instructions.resize(corpus.size());
    p.seconds.resize(corpus.size());
    parallel_for(corpus.size(), jobs, [&](size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto a = analyze(read_bytecode(corpus[i].path), embedder, corpus[i].id);
        const auto x = features_of(a, b.stats).fused(b.mode);
        for (const auto cls : kAllVulnClasses)
            p.probabilities[i][index_of(cls)] = b.models[index_of(cls)].predict(x);
        p.seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        p.instructions[i] = a.stream.instructions.size();
    });
    return p;
}

inline EvalReport evaluate_bundle(
    const ModelBundle& b, std::span<const LabeledContract> corpus, const FragmentEmbedder& embedder, size_t jobs = 1)
{
    const auto p = predict_corpus(b, corpus, embedder, jobs);
    std::vector<LabelSet> labels;
    for (const auto& c : corpus)
        labels.push_back(c.labels);
    auto report = evaluate_predictions(p.probabilities, labels);
    double total = 0.0;
    for (const double s : p.seconds)
        total += s;
    report.mean_seconds = corpus.empty() ? 0.0 : total / static_cast<double>(corpus.size());
    report.timing = bucket_timings(p.instructions, p.seconds);
    return report;
}

struct TrainResult
{
    ModelBundle bundle;
    CorpusSplit split;
    EvalReport test_report;
};

/// Splits the corpus, fits document frequencies on the training side only,
/// trains one ensemble per class and scores the held-out side.
inline TrainResult train_bundle(std::span<const LabeledContract> corpus, const TrainOptions& opt)
{
    opt.encoder.validate();
    opt.gbdt.validate();
    TrainResult r;
    r.split = split_corpus(corpus, opt.split_ratio, opt.split_seed);

    auto& b = r.bundle;
    b.mode = opt.mode;
    b.encoder = opt.encoder;
    b.weights_path = opt.weights_path;
    b.embeddings_path = opt.embeddings_path;
    if (!b.weights_path.empty())
        b.weights_checksum = file_checksum(b.weights_path);
    b.train_config = opt.gbdt;
    b.feature_dim = feature_dimension(b.mode, b.encoder.d_model);
    const auto embedder = make_embedder(b);

    const auto analyzed = analyze_corpus(r.split.train, embedder, opt.jobs);
    std::vector<OpcodeSequence> docs;
    docs.reserve(analyzed.size());
    for (const auto& a : analyzed)
        docs.push_back(a.analysis.opcodes);
    b.stats = fit_corpus_stats(docs);

    std::vector<FeatureVector> features;
    features.reserve(analyzed.size());
    for (const auto& a : analyzed)
        features.push_back(features_of(a.analysis, b.stats));
    const auto x = feature_matrix(features, b.mode, b.feature_dim);

    parallel_for(kNumVulnClasses, opt.jobs, [&](size_t k) {
        const auto cls = kAllVulnClasses[k];
        std::vector<double> y(r.split.train.size());
        for (size_t i = 0; i < y.size(); ++i)
            y[i] = r.split.train[i].labels.has(cls) ? 1.0 : 0.0;
        try
        {
            b.models[k] = gbdt::train(x, y, b.train_config);
        }
        catch (const DegenerateLabels& e)
        {
            throw DegenerateLabels("class " + std::string(to_string(cls)) + ": " + e.what());
        }
    });

    r.test_report = evaluate_bundle(b, r.split.test, embedder, opt.jobs);
    return r;
}

}  // namespace evmscan
