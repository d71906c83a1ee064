// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bundle.hpp"
#include "cfg.hpp"
#include "features.hpp"
#include "fragments.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace evmscan
{
inline constexpr std::string_view kScanReportSchema = "evmscan.scan-report/1";

struct FragmentLocation
{
    size_t seed_block = 0;
    size_t seed_pc = 0;
    std::vector<size_t> block_ids;
    std::optional<FunctionSelector> selector;
};

struct ClassVerdict
{
    VulnClass vuln_class = VulnClass::RV;
    double probability = 0.0;
    bool vulnerable = false;
    std::vector<FragmentLocation> fragments;
};

struct ScanReport
{
    std::string source;
    size_t code_size = 0;
    size_t instructions = 0;
    size_t blocks = 0;
    size_t edges = 0;
    size_t unresolved_jumps = 0;
    std::array<ClassVerdict, kNumVulnClasses> classes;
    /// Wall clock for disassembly through prediction.
    double analysis_seconds = 0.0;

    const ClassVerdict& operator[](VulnClass c) const noexcept { return classes[index_of(c)]; }
};

/// Holds a loaded bundle and its embedder; `scan` is const and safe to call
/// from several threads.
class Scanner
{
public:
    explicit Scanner(ModelBundle bundle) : bundle_(std::move(bundle)), embedder_(make_embedder(bundle_)) {}

    const ModelBundle& bundle() const noexcept { return bundle_; }

    /// `cfg_out`, when given, receives the recovered CFG for DOT export.
    ScanReport scan(const RawBytecode& code, Cfg* cfg_out = nullptr) const
    {
        const auto t0 = std::chrono::steady_clock::now();
        auto a = analyze(code, embedder_);
        const auto x = features_of(a, bundle_.stats).fused(bundle_.mode);
        ScanReport r;
        for (const auto cls : kAllVulnClasses)
        {
            auto& v = r.classes[index_of(cls)];
            v.vuln_class = cls;
            v.probability = bundle_.models[index_of(cls)].predict(x);
            v.vulnerable = v.probability >= kDecisionThreshold;
        }
        r.analysis_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        r.source = code.source_id;
        r.code_size = code.bytes.size();
        r.instructions = a.stream.instructions.size();
        r.blocks = a.cfg.blocks.size();
        r.edges = a.cfg.edges.size();
        r.unresolved_jumps = a.cfg.unresolved_jumps.size();
        for (const auto cls : kAllVulnClasses)
        {
            for (const auto& f : a.fragments[index_of(cls)])
                r.classes[index_of(cls)].fragments.push_back(
                    {f.seed_block, a.cfg.blocks[f.seed_block].start_pc, f.block_ids, f.selector});
        }
        if (cfg_out)
            *cfg_out = std::move(a.cfg);
        return r;
    }

private:
    ModelBundle bundle_;
    FragmentEmbedder embedder_;
};

inline nlohmann::json report_to_json(const ScanReport& r)
{
    using nlohmann::json;
    json classes = json::object();
    for (const auto& v : r.classes)
    {
        json frags = json::array();
        for (const auto& f : v.fragments)
        {
            json fj = {{"seed_block", f.seed_block}, {"seed_pc", f.seed_pc}, {"blocks", f.block_ids}};
            fj["selector"] = f.selector ? json(f.selector->hex()) : json(nullptr);
            frags.push_back(std::move(fj));
        }
        classes[std::string(to_string(v.vuln_class))] = {
            {"probability", v.probability}, {"vulnerable", v.vulnerable}, {"fragments", std::move(frags)}};
    }
    return {{"schema", kScanReportSchema}, {"source", r.source}, {"code_size", r.code_size},
        {"instructions", r.instructions}, {"blocks", r.blocks}, {"edges", r.edges},
        {"unresolved_jumps", r.unresolved_jumps}, {"analysis_seconds", r.analysis_seconds},
        {"classes", std::move(classes)}};
}

inline std::string format_scan_report(const ScanReport& r)
{
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%s: %zu bytes, %zu instructions, %zu blocks, %zu unresolved jumps\n",
        r.source.c_str(), r.code_size, r.instructions, r.blocks, r.unresolved_jumps);
    out += line;
    for (const auto& v : r.classes)
    {
        std::snprintf(line, sizeof line, "  %-4s p=%.4f %s", std::string(to_string(v.vuln_class)).c_str(),
            v.probability, v.vulnerable ? "VULNERABLE" : "ok");
        out += line;
        if (!v.fragments.empty())
        {
            out += "  seeds at pc";
            for (const auto& f : v.fragments)
            {
                std::snprintf(line, sizeof line, " 0x%zx", f.seed_pc);
                out += line;
                if (f.selector)
                    out += " (" + f.selector->hex() + ")";
            }
        }
        out += '\n';
    }
    std::snprintf(line, sizeof line, "  analysis time: %.6f s\n", r.analysis_seconds);
    out += line;
    return out;
}

}  // namespace evmscan
