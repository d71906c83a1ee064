// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common.hpp"
#include "disasm.hpp"
#include "errors.hpp"
#include "fragments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace evmscan
{
/// Subset of the four vulnerability classes.
class LabelSet
{
public:
    constexpr LabelSet() = default;
    constexpr LabelSet(std::initializer_list<VulnClass> classes)
    {
        for (const auto c : classes)
            set(c);
    }

    constexpr bool has(VulnClass c) const noexcept { return (bits_ >> index_of(c)) & 1u; }
    constexpr void set(VulnClass c, bool on = true) noexcept
    {
        const auto mask = static_cast<uint8_t>(1u << index_of(c));
        bits_ = on ? static_cast<uint8_t>(bits_ | mask) : static_cast<uint8_t>(bits_ & ~mask);
    }
    constexpr uint8_t bits() const noexcept { return bits_; }
    constexpr bool empty() const noexcept { return bits_ == 0; }

    std::string to_string() const
    {
        std::string s;
        for (const auto c : kAllVulnClasses)
        {
            if (!has(c))
                continue;
            if (!s.empty())
                s += ',';
            s += evmscan::to_string(c);
        }
        return s;
    }

    friend constexpr bool operator==(LabelSet, LabelSet) = default;

private:
    uint8_t bits_ = 0;
};

struct LabeledContract
{
    std::string id;
    std::string path;
    LabelSet labels;
};

/// One line per contract: "contract_id,CLASS,CLASS,...". The class list may be
/// empty. Blank lines and lines starting with '#' are skipped.
inline std::vector<std::pair<std::string, LabelSet>> parse_labels(std::string_view text)
{
    std::vector<std::pair<std::string, LabelSet>> out;
    std::set<std::string> seen;
    size_t line_no = 0;
    while (!text.empty())
    {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;

        std::vector<std::string_view> fields;
        size_t start = 0;
        for (;;)
        {
            const auto comma = line.find(',', start);
            auto f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            while (!f.empty() && (f.front() == ' ' || f.front() == '\t'))
                f.remove_prefix(1);
            while (!f.empty() && (f.back() == ' ' || f.back() == '\t'))
                f.remove_suffix(1);
            fields.push_back(f);
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }

        const std::string id(fields[0]);
        if (id.empty())
            throw CorpusFormatError("line " + std::to_string(line_no) + ": empty contract id");
        if (!seen.insert(id).second)
            throw CorpusFormatError("line " + std::to_string(line_no) + ": duplicate contract id " + id);
        LabelSet labels;
        for (size_t i = 1; i < fields.size(); ++i)
        {
            if (fields[i].empty())
                continue;
            const auto cls = vuln_class_from_string(fields[i]);
            if (!cls)
                throw CorpusFormatError("line " + std::to_string(line_no) + ": unknown class '" +
                                        std::string(fields[i]) + "'");
            labels.set(*cls);
        }
        out.emplace_back(id, labels);
    }
    return out;
}

inline std::string format_labels(std::span<const LabeledContract> contracts)
{
    std::string out;
    for (const auto& c : contracts)
    {
        out += c.id;
        out += ',';
        out += c.labels.to_string();
        out += '\n';
    }
    return out;
}

inline RawBytecode read_bytecode(const std::string& path)
{
    std::string text;
    if (!read_file(path, text))
        throw CorpusFormatError("cannot read " + path);
    return parse_hex(text, path);
}

/// Contracts listed in the labels file, each read from <dir>/<id>.hex.
inline std::vector<LabeledContract> load_corpus(const std::string& dir, const std::string& labels_path)
{
    std::string text;
    if (!read_file(labels_path, text))
        throw CorpusFormatError("cannot read labels file " + labels_path);
    std::vector<LabeledContract> out;
    for (auto& [id, labels] : parse_labels(text))
    {
        const auto path = (std::filesystem::path(dir) / (id + ".hex")).string();
        if (!std::filesystem::is_regular_file(path))
            throw CorpusFormatError("missing bytecode file " + path);
        out.push_back({id, path, labels});
    }
    return out;
}

/// Every *.hex file in `dir`, unlabeled, sorted by id.
inline std::vector<LabeledContract> list_corpus(const std::string& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw CorpusFormatError(dir + " is not a directory");
    std::vector<LabeledContract> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
    {
        if (entry.is_regular_file() && entry.path().extension() == ".hex")
            out.push_back({entry.path().stem().string(), entry.path().string(), {}});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

struct SplitIndices
{
    std::vector<size_t> train;
    std::vector<size_t> test;
};

/// Seeded shuffle, stratified by label set: every label-set group is spread
/// across the split in proportion to `ratio`. The training side receives
/// round(ratio * n) items, clamped so both sides are non-empty.
inline SplitIndices split_indices(std::span<const LabelSet> labels, double ratio, uint64_t seed)
{
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError("split ratio must be in (0, 1)");
    const size_t n = labels.size();
    if (n < 2)
        throw CorpusTooSmall("need at least 2 contracts to split, got " + std::to_string(n));

    std::map<uint8_t, std::vector<size_t>> groups;
    for (size_t i = 0; i < n; ++i)
        groups[labels[i].bits()].push_back(i);

    // Items are ranked by their fractional position within their shuffled
    // group, so taking a prefix of the ranking samples each group evenly.
    struct Ranked
    {
        double position;
        uint8_t group;
        size_t index;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(n);
    SplitMix64 rng(seed);
    for (auto& [key, members] : groups)
    {
        rng.shuffle(members);
        for (size_t k = 0; k < members.size(); ++k)
            ranked.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(members.size()), key, members[k]});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.position != b.position)
            return a.position < b.position;
        return a.group < b.group;
    });

    auto n_train = static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));
    n_train = std::clamp<size_t>(n_train, 1, n - 1);
    SplitIndices out;
    for (size_t k = 0; k < n; ++k)
        (k < n_train ? out.train : out.test).push_back(ranked[k].index);
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

struct CorpusSplit
{
    std::vector<LabeledContract> train;
    std::vector<LabeledContract> test;
};

inline CorpusSplit split_corpus(std::span<const LabeledContract> corpus, double ratio, uint64_t seed)
{
    std::vector<LabelSet> labels;
    labels.reserve(corpus.size());
    for (const auto& c : corpus)
        labels.push_back(c.labels);
    const auto idx = split_indices(labels, ratio, seed);
    CorpusSplit out;
    for (const auto i : idx.train)
        out.train.push_back(corpus[i]);
    for (const auto i : idx.test)
        out.test.push_back(corpus[i]);
    return out;
}

}  // namespace evmscan
