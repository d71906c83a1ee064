// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scan, train, eval, synth, dump-fragments.
// Exit status: 0 success, 1 bad input, 2 internal failure.

#include "evmscan/evmscan.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

namespace
{
using namespace evmscan;

struct ScanArgs
{
    std::string file;
    std::string model;
    std::string dot;
    bool json = false;
};

struct TrainArgs
{
    std::string corpus;
    std::string labels;
    std::string out;
    std::string features = "full";
    uint64_t seed = 0;
    std::string weights;
    std::string embeddings;
    double split = 0.8;
    size_t jobs = 1;
    size_t d_model = 64;
    size_t n_layers = 2;
    size_t n_heads = 4;
    size_t max_len = 512;
    gbdt::TrainConfig gbdt;
};

struct EvalArgs
{
    std::string model;
    std::string corpus;
    std::string labels;
    size_t jobs = 1;
};

struct SynthArgs
{
    size_t n = 400;
    uint64_t seed = 0;
    std::string out;
    size_t target_instructions = 0;
};

struct DumpArgs
{
    std::string corpus;
    std::string out;
    size_t max_len = 512;
};

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os || !(os << text))
        throw ConfigError("cannot write " + path);
}

int run_scan(const ScanArgs& a)
{
    const Scanner scanner(load_bundle(a.model));
    Cfg cfg;
    const auto report = scanner.scan(read_bytecode(a.file), a.dot.empty() ? nullptr : &cfg);
    if (!a.dot.empty())
        write_text(a.dot, to_dot(cfg));
    if (a.json)
        std::cout << report_to_json(report).dump(2) << '\n';
    else
        std::cout << format_scan_report(report);
    return 0;
}

int run_train(const TrainArgs& a)
{
    const auto mode = feature_mode_from_string(a.features);
    if (!mode)
        throw ConfigError("--features must be tfidf, cfg or full");
    TrainOptions opt;
    opt.mode = *mode;
    opt.encoder.d_model = a.d_model;
    opt.encoder.n_layers = a.n_layers;
    opt.encoder.n_heads = a.n_heads;
    opt.encoder.max_len = a.max_len;
    opt.encoder.seed = a.seed;
    opt.weights_path = a.weights;
    opt.embeddings_path = a.embeddings;
    opt.split_ratio = a.split;
    opt.split_seed = a.seed;
    opt.gbdt = a.gbdt;
    opt.gbdt.seed = a.seed;
    opt.jobs = a.jobs;

    const auto corpus = load_corpus(a.corpus, a.labels);
    const auto result = train_bundle(corpus, opt);
    save_bundle(result.bundle, a.out);
    std::cout << "trained on " << result.split.train.size() << " contracts, held out "
              << result.split.test.size() << " (" << to_string(opt.mode) << " features, dim "
              << result.bundle.feature_dim << ")\n"
              << format_report(result.test_report);
    return 0;
}

int run_eval(const EvalArgs& a)
{
    const auto bundle = load_bundle(a.model);
    const auto embedder = make_embedder(bundle);
    const auto corpus = load_corpus(a.corpus, a.labels);
    std::cout << format_report(evaluate_bundle(bundle, corpus, embedder, a.jobs));
    return 0;
}

int run_synth(const SynthArgs& a)
{
    SynthOptions opt;
    opt.target_instructions = a.target_instructions;
    const auto corpus = generate_synthetic_corpus(a.n, a.seed, opt);
    write_synthetic_corpus(a.out, corpus);
    std::cout << "wrote " << corpus.size() << " contracts to " << a.out << '\n';
    return 0;
}

int run_dump(const DumpArgs& a)
{
    std::ofstream os(a.out, std::ios::binary | std::ios::trunc);
    if (!os)
        throw ConfigError("cannot write " + a.out);
    size_t records = 0;
    for (const auto& c : list_corpus(a.corpus))
    {
        const auto cfg = build_cfg(disassemble(read_bytecode(c.path)));
        for (const auto& frags : extract_all_fragments(cfg))
        {
            for (const auto& f : frags)
            {
                os << format_fragment_record(c.id, f, a.max_len) << '\n';
                ++records;
            }
        }
    }
    if (!os)
        throw ConfigError("write failed for " + a.out);
    std::cout << "wrote " << records << " fragments to " << a.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"evmscan: vulnerability scanner for EVM bytecode"};
    app.require_subcommand(1);

    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "Scan one hex bytecode file");
    scan_cmd->add_option("file", scan.file, "Hex bytecode file")->required();
    scan_cmd->add_option("--model", scan.model, "Model bundle")->required();
    scan_cmd->add_option("--dot", scan.dot, "Write the CFG in Graphviz DOT format");
    scan_cmd->add_flag("--json", scan.json, "Print the report as JSON");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train per-class classifiers on a labeled corpus");
    train_cmd->add_option("--corpus", train.corpus, "Directory of <id>.hex files")->required();
    train_cmd->add_option("--labels", train.labels, "Labels CSV")->required();
    train_cmd->add_option("--out", train.out, "Output bundle path")->required();
    train_cmd->add_option("--features", train.features, "tfidf, cfg or full")->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "Seed for the split, encoder init and trainer")
        ->capture_default_str();
    train_cmd->add_option("--weights", train.weights, "Encoder weight file (default: seeded init)");
    train_cmd->add_option("--embeddings", train.embeddings, "Precomputed fragment embedding table");
    train_cmd->add_option("--split", train.split, "Training fraction")->capture_default_str();
    train_cmd->add_option("--jobs", train.jobs, "Worker threads")->capture_default_str();
    train_cmd->add_option("--d-model", train.d_model, "Encoder width")->capture_default_str();
    train_cmd->add_option("--layers", train.n_layers, "Encoder layers")->capture_default_str();
    train_cmd->add_option("--heads", train.n_heads, "Attention heads")->capture_default_str();
    train_cmd->add_option("--max-len", train.max_len, "Fragment token limit")->capture_default_str();
    train_cmd->add_option("--trees", train.gbdt.n_trees, "Boosting rounds")->capture_default_str();
    train_cmd->add_option("--learning-rate", train.gbdt.learning_rate, "Shrinkage")->capture_default_str();
    train_cmd->add_option("--max-leaves", train.gbdt.max_leaves, "Leaves per tree")->capture_default_str();
    train_cmd->add_option("--min-leaf", train.gbdt.min_samples_leaf, "Samples per leaf")->capture_default_str();
    train_cmd->add_option("--leaf-penalty", train.gbdt.leaf_penalty, "Per-leaf gain penalty")
        ->capture_default_str();
    train_cmd->add_option("--l2", train.gbdt.l2_weight, "Leaf weight L2 regularization")->capture_default_str();

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a bundle on a labeled corpus");
    eval_cmd->add_option("--model", eval.model, "Model bundle")->required();
    eval_cmd->add_option("--corpus", eval.corpus, "Directory of <id>.hex files")->required();
    eval_cmd->add_option("--labels", eval.labels, "Labels CSV")->required();
    eval_cmd->add_option("--jobs", eval.jobs, "Worker threads")->capture_default_str();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    synth_cmd->add_option("--n", synth.n, "Number of contracts (>= 8)")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--min-instructions", synth.target_instructions, "Pad contracts to this size");

    DumpArgs dump;
    auto* dump_cmd = app.add_subcommand("dump-fragments", "Write fragment token records for external training");
    dump_cmd->add_option("--corpus", dump.corpus, "Directory of <id>.hex files")->required();
    dump_cmd->add_option("--out", dump.out, "Output file")->required();
    dump_cmd->add_option("--max-len", dump.max_len, "Token limit per fragment")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try
    {
        if (*scan_cmd)
            return run_scan(scan);
        if (*train_cmd)
            return run_train(train);
        if (*eval_cmd)
            return run_eval(eval);
        if (*synth_cmd)
            return run_synth(synth);
        if (*dump_cmd)
            return run_dump(dump);
    }
    catch (const Error& e)
    {
        std::cerr << "evmscan: " << e.what() << '\n';
        return e.is_input_error() ? 1 : 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "evmscan: internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
