// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

// ctxspec: run, ablate and sweep context-drafted speculative decoding over a corpus.

#include "ctxspec/harness.hpp"
#include "ctxspec/kernels.hpp"
#include "ctxspec/synth.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <thread>

namespace
{

struct CommonArgs
{
    std::string corpus;
    std::string model;
    std::string mode = "adaptive";
    std::string out;
    ctxspec::EngineConfig config;
    bool no_alignment_sampling = false;
    std::size_t jobs = 1;
    bool timing = false;
    std::string isa;
};

void add_engine_options(CLI::App* cmd, CommonArgs& a, bool with_mode)
{
    cmd->add_option("--corpus", a.corpus, "corpus file (JSON Lines)")->required();
    cmd->add_option("--model", a.model, "table:<file> | ngram:<file>,<order>,<k>[,<vocab>] | ngram-text:<file>,<order>,<k>")
        ->required();
    if (with_mode)
    {
        cmd->add_option("--mode", a.mode, "strict | fixed:<delta> | topk:<k> | adaptive")->capture_default_str();
    }
    cmd->add_option("--alpha", a.config.alpha, "entropy weight of the adaptive threshold")->capture_default_str();
    cmd->add_option("--beta", a.config.beta, "base of the adaptive threshold")->capture_default_str();
    cmd->add_option("--ngram-len", a.config.ngram_len, "tokens copied per retrieved candidate")->capture_default_str();
    cmd->add_option("--max-key-len", a.config.max_key_len, "longest retrieval key")->capture_default_str();
    cmd->add_option("--min-key-len", a.config.min_key_len, "shortest retrieval key")->capture_default_str();
    cmd->add_option("--max-expansion", a.config.max_expansion, "alignment-sampled tokens per slot")
        ->capture_default_str();
    cmd->add_option("--cache-topk", a.config.cache_topk, "entries kept per cached distribution")->capture_default_str();
    cmd->add_option("--max-candidates", a.config.max_candidates, "retrieved positions per step")->capture_default_str();
    cmd->add_option("--max-new", a.config.max_new_tokens, "generation budget per item")->capture_default_str();
    cmd->add_option("--eos", a.config.eos, "EOS token id (default: vocab_size - 1)");
    cmd->add_option("--seed", a.config.seed, "seed recorded with the run")->capture_default_str();
    cmd->add_flag("--no-alignment-sampling", a.no_alignment_sampling, "draft retrieved n-grams only");
    cmd->add_option("--jobs", a.jobs, "items decoded concurrently")->capture_default_str();
    cmd->add_flag("--timing", a.timing, "record wall-clock fields (makes reports non-reproducible)");
    cmd->add_option("--out", a.out, "report file (default: stdout)");
    cmd->add_option("--isa", a.isa, "force kernel ISA: scalar | avx2");
}

void write_output(std::string const& path, std::string const& text)
{
    if (path.empty())
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ctxspec::Error(ctxspec::ErrorCode::BadConfig, "cannot write " + path);
    }
    out << text;
}

ctxspec::RunOptions make_options(CommonArgs const& a)
{
    if (!a.isa.empty())
    {
        auto const isa = a.isa == "avx2" ? ctxspec::kernels::Isa::Avx2 : ctxspec::kernels::Isa::Scalar;
        if ((a.isa != "avx2" && a.isa != "scalar") || !ctxspec::kernels::select(isa))
        {
            throw ctxspec::Error(ctxspec::ErrorCode::BadConfig, "kernel ISA '" + a.isa + "' is unavailable");
        }
    }
    ctxspec::RunOptions o;
    o.config = a.config;
    o.config.mode = ctxspec::VerificationMode::parse(a.mode);
    o.config.alignment_sampling = !a.no_alignment_sampling;
    o.jobs = a.jobs;
    o.timing = a.timing;
    o.config.validate();
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Context-drafted speculative decoding harness"};
    app.require_subcommand(1);

    CommonArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "decode every corpus item and report acceptance metrics");
    add_engine_options(run_cmd, run_args, true);

    CommonArgs ablate_args;
    auto* ablate_cmd = app.add_subcommand("ablate", "compare full, no-as, no-cv, fixed:0.1 and topk:5 columns");
    add_engine_options(ablate_cmd, ablate_args, false);

    CommonArgs sweep_args;
    std::vector<double> thresholds{1e-1, 1e-3, 1e-5, 1e-7};
    auto* sweep_cmd = app.add_subcommand("sweep", "fixed-threshold verification at several thresholds");
    add_engine_options(sweep_cmd, sweep_args, false);
    sweep_cmd->add_option("--thresholds", thresholds, "thresholds to sweep")->delimiter(',')->capture_default_str();

    std::string overlap_corpus;
    std::string overlap_out;
    bool substring = false;
    auto* overlap_cmd = app.add_subcommand("overlap", "prompt/reference overlap ratio per item");
    overlap_cmd->add_option("--corpus", overlap_corpus, "corpus file (JSON Lines)")->required();
    overlap_cmd->add_flag("--substring", substring, "longest common substring instead of subsequence");
    overlap_cmd->add_option("--out", overlap_out, "report file (default: stdout)");

    ctxspec::CopyCorpusSpec synth_spec;
    std::string synth_corpus_out;
    std::string synth_stream_out;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic high-overlap corpus and training stream");
    synth_cmd->add_option("--corpus-out", synth_corpus_out, "corpus file to write")->required();
    synth_cmd->add_option("--stream-out", synth_stream_out, "token stream to write (for ngram:)")->required();
    synth_cmd->add_option("--vocab", synth_spec.vocab, "content tokens")->capture_default_str();
    synth_cmd->add_option("--items", synth_spec.items, "corpus items")->capture_default_str();
    synth_cmd->add_option("--reference-len", synth_spec.reference_len, "reference tokens per item")
        ->capture_default_str();
    synth_cmd->add_option("--train-tokens", synth_spec.train_tokens, "training stream length")->capture_default_str();
    synth_cmd->add_option("--branching", synth_spec.branching, "successors per state")->capture_default_str();
    synth_cmd->add_option("--chain-order", synth_spec.chain_order, "tokens per chain state")->capture_default_str();
    synth_cmd->add_option("--skew", synth_spec.skew, "log-weight spread between successors")->capture_default_str();
    synth_cmd->add_option("--seed", synth_spec.seed, "generator seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run_cmd->parsed() || ablate_cmd->parsed() || sweep_cmd->parsed())
        {
            CommonArgs const& a = run_cmd->parsed() ? run_args : ablate_cmd->parsed() ? ablate_args : sweep_args;
            auto const options = make_options(a);
            auto const model = ctxspec::load_model(a.model);
            auto const corpus = ctxspec::load_corpus(a.corpus);
            std::vector<ctxspec::RunReport> runs;
            if (run_cmd->parsed())
            {
                runs.push_back(ctxspec::run_corpus(*model, corpus, options));
            }
            else if (ablate_cmd->parsed())
            {
                runs = ctxspec::ablate(*model, corpus, options);
            }
            else
            {
                runs = ctxspec::sweep(*model, corpus, thresholds, options);
            }
            write_output(a.out, ctxspec::format_report(runs, options.timing));
            for (auto const& r : runs)
            {
                std::cerr << r.mode << ": items=" << r.aggregate.items << " mal=" << r.aggregate.mal
                          << " steps=" << r.aggregate.steps << " tokens=" << r.aggregate.tokens << '\n';
            }
        }
        else if (overlap_cmd->parsed())
        {
            auto const corpus = ctxspec::load_corpus(overlap_corpus);
            auto const report = ctxspec::overlap(
                corpus, substring ? ctxspec::OverlapKind::Substring : ctxspec::OverlapKind::Subsequence);
            write_output(overlap_out, ctxspec::format_overlap(report));
        }
        else if (synth_cmd->parsed())
        {
            auto const setup = ctxspec::make_copy_corpus(synth_spec);
            write_output(synth_corpus_out, ctxspec::format_corpus(setup.corpus));
            std::string stream;
            for (std::size_t i = 0; i < setup.training_stream.size(); ++i)
            {
                stream += std::to_string(setup.training_stream[i]);
                stream += (i + 1) % 32 == 0 ? '\n' : ' ';
            }
            stream += '\n';
            write_output(synth_stream_out, stream);
            std::cerr << "model vocab: " << setup.vocab_size << " (pass ngram:" << synth_stream_out << ","
                      << synth_spec.chain_order + 1 << ",0.1,"
                      << setup.vocab_size << ")\n";
        }
    }
    catch (ctxspec::Error const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
