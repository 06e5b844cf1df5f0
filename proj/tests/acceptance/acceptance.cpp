// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include "ctxspec/harness.hpp"
#include "ctxspec/synth.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace ctxspec;

namespace
{

struct Verdict
{
    bool ok = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(char const* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// Shared copy-corpus setup for the directional criteria.
struct CopySetup
{
    SyntheticSetup synth;
    NGramLM model;
    RunOptions options;
};

CopySetup const& copy_setup()
{
    static CopySetup const setup = []
    {
        CopySetup s;
        CopyCorpusSpec spec;
        s.synth = make_copy_corpus(spec);
        s.model = NGramLM::train(s.synth.training_stream, spec.chain_order + 1, 0.1, s.synth.vocab_size);
        s.options.config.max_new_tokens = spec.reference_len;
        s.options.jobs = std::max(1u, std::thread::hardware_concurrency());
        return s;
    }();
    return setup;
}

RunOptions with_mode(RunOptions o, VerificationMode mode, bool alignment_sampling = true)
{
    o.config.mode = mode;
    o.config.alignment_sampling = alignment_sampling;
    return o;
}

Verdict lossless()
{
    auto const start = Clock::now();
    auto const& s = copy_setup();
    auto corpus = make_random_prompts(120, 4, 64, s.synth.vocab_size - 1, 11);
    std::size_t n = 0;
    for (auto const& item : s.synth.corpus)
    {
        if (n++ == 120)
        {
            break;
        }
        corpus.push_back(item);
    }
    RunOptions o = with_mode(s.options, VerificationMode::strict());
    o.config.max_new_tokens = 256;
    auto const report = run_corpus(s.model, corpus, o);
    std::size_t matched = 0;
    for (auto const& it : report.items)
    {
        matched += it.matches_greedy.value_or(false) ? 1 : 0;
    }
    double const secs = seconds_since(start);
    return {matched == corpus.size() && corpus.size() >= 200 && secs < 60.0,
        fmt("%zu/%zu prompts identical to greedy, vocab %zu, %.1fs", matched, corpus.size(), s.model.vocab_size(), secs)};
}

Verdict reduction()
{
    std::size_t const vocab = 12;
    auto model = TableModel::random(vocab, 2, 2024, 2.0);
    // Tie-free: every full-window row has distinct probabilities.
    for (TokenId a = 0; a < static_cast<TokenId>(vocab); ++a)
    {
        for (TokenId b = 0; b < static_cast<TokenId>(vocab); ++b)
        {
            auto p = model.next(std::vector<TokenId>{a, b}).probs;
            std::sort(p.begin(), p.end());
            if (std::adjacent_find(p.begin(), p.end()) != p.end())
            {
                return {false, "random table has a tie"};
            }
        }
    }
    auto const corpus = make_random_prompts(120, 2, 48, 4, 5);
    RunOptions strict;
    strict.config.mode = VerificationMode::strict();
    strict.config.max_new_tokens = 64;
    strict.jobs = 4;
    RunOptions reduced = strict;
    reduced.config.mode = VerificationMode::adaptive();
    reduced.config.alpha = 0.0;
    reduced.config.beta = 1.0;
    auto const a = run_corpus(model, corpus, strict);
    auto const b = run_corpus(model, corpus, reduced);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.items.size(); ++i)
    {
        same += a.items[i].output == b.items[i].output ? 1 : 0;
    }
    return {same == corpus.size(), fmt("%zu/%zu prompts identical", same, corpus.size())};
}

Verdict threshold_formula()
{
    double const e1 = std::abs(adaptive_threshold(Distribution::one_hot(4, 1), 0.1, 0.1) - 0.1);
    double const e2 = std::abs(adaptive_threshold(Distribution::uniform(4), 0.1, 0.1) - 0.238629436111989);
    double const e3 = std::abs(adaptive_threshold(Distribution::full({0.9, 0.1}), 0.1, 0.1) - 0.132508297339145);
    double const worst = std::max({e1, e2, e3});
    return {worst <= 1e-9, fmt("max abs error %.3g", worst)};
}

Verdict tree_path_equivalence()
{
    std::mt19937_64 rng(4);
    std::vector<VerificationMode> const modes{VerificationMode::strict(), VerificationMode::adaptive(),
        VerificationMode::fixed(0.05), VerificationMode::top_k(3)};
    std::size_t agree = 0;
    std::size_t const trials = 1000;
    for (std::size_t trial = 0; trial < trials; ++trial)
    {
        std::size_t const vocab = 3 + rng() % 6;
        auto model = TableModel::random(vocab, 1 + rng() % 2, rng(), 1.0 + static_cast<double>(rng() % 3));
        std::vector<TokenId> committed;
        for (std::size_t i = 0, n = 2 + rng() % 6; i < n; ++i)
        {
            committed.push_back(static_cast<TokenId>(rng() % vocab));
        }
        auto const tree = oracle::random_tree(rng, committed.back(), 64, vocab);
        VerifyParams const p{modes[trial % modes.size()], 0.1, 0.1};
        auto const got = verify_tree(tree, model.forward_tree(committed, tree, tree_mask(tree)), p);
        auto const want = oracle::sequential_paths(model, committed, tree, p);
        auto const path = tree.path_tokens(got.accepted_path.empty() ? 0 : got.accepted_path.back());
        agree += path == want.tokens && got.bonus == want.bonus ? 1 : 0;
    }
    return {agree == trials, fmt("%zu/%zu trees", agree, trials)};
}

Verdict pool_oracle()
{
    std::mt19937_64 rng(5);
    std::size_t const trials = 500;
    std::size_t agree = 0;
    std::size_t lookups = 0;
    for (std::size_t trial = 0; trial < trials; ++trial)
    {
        std::size_t const len = 1 + rng() % 2000;
        std::size_t const vocab = 1 + rng() % 50;
        std::size_t const key_len = 1 + rng() % 6;
        std::vector<TokenId> seq(len);
        for (auto& t : seq)
        {
            t = static_cast<TokenId>(rng() % vocab);
        }
        bool ok = true;
        std::size_t cut = 1 + rng() % len;
        auto pool = DraftPool::build(std::span<TokenId const>(seq).first(cut), key_len);
        ok = pool.snapshot() == oracle::window_scan({seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(cut)}, key_len);
        while (ok && cut < len)
        {
            cut = std::min(len, cut + 1 + rng() % 97);
            pool.extend(std::span<TokenId const>(seq).first(cut));
            std::vector<TokenId> prefix(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(cut));
            std::size_t const cap = rng() % 5;
            std::size_t const min_key = 1 + rng() % 2;
            auto const got = pool.lookup_longest(prefix, cap, min_key);
            auto const want = oracle::suffix_scan(prefix, cut, key_len, min_key, cap);
            ++lookups;
            ok = got.has_value() == want.has_value()
                && (!got || (got->key_len == want->key_len && got->positions == want->positions));
        }
        ok = ok && pool.snapshot() == oracle::window_scan(seq, key_len);
        agree += ok ? 1 : 0;
    }
    return {agree == trials, fmt("%zu/%zu sequences, %zu lookups", agree, trials, lookups)};
}

struct DirectionalRuns
{
    std::vector<RunReport> ablation; // full, no-as, no-cv, fixed:0.1, topk:5
    double seconds = 0.0;
};

DirectionalRuns const& directional_runs()
{
    static DirectionalRuns const runs = []
    {
        DirectionalRuns r;
        auto const start = Clock::now();
        auto const& s = copy_setup();
        r.ablation = ablate(s.model, s.synth.corpus, s.options);
        r.seconds = seconds_since(start);
        return r;
    }();
    return runs;
}

Verdict directional_mal()
{
    auto const& r = directional_runs();
    double const full = r.ablation[0].aggregate.mal;
    double const no_as = r.ablation[1].aggregate.mal;
    double const strict = r.ablation[2].aggregate.mal;
    bool const ok = full >= no_as && no_as >= strict && strict >= 1.0 && full > 1.5 && r.seconds < 120.0;
    return {ok, fmt("MAL adaptive+AS %.3f, adaptive-AS %.3f, strict %.3f over %zu items, %.1fs", full, no_as, strict,
                    r.ablation[0].items.size(), r.seconds)};
}

Verdict monotone_sweep()
{
    auto const& s = copy_setup();
    std::vector<double> const thresholds{1e-1, 1e-3, 1e-5, 1e-7};
    auto const rows = sweep(s.model, s.synth.corpus, thresholds, s.options);
    bool ok = true;
    std::ostringstream detail;
    detail << "MAL";
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        detail << ' ' << thresholds[i] << "->" << rows[i].aggregate.mal;
        if (i > 0 && rows[i].aggregate.mal < rows[i - 1].aggregate.mal)
        {
            ok = false;
        }
    }
    return {ok, detail.str()};
}

Verdict alignment_analysis()
{
    auto const& strict = directional_runs().ablation[2].aggregate;
    auto const aligned = strict.aligned.rate();
    auto const misaligned = strict.misaligned.rate();
    if (!aligned || !misaligned)
    {
        return {false, "no aligned or no misaligned draft tokens"};
    }
    return {*aligned > *misaligned, fmt("aligned %.3f (%zu drafted) vs misaligned %.3f (%zu drafted)", *aligned,
                                        strict.aligned.drafted, *misaligned, strict.misaligned.drafted)};
}

// All sequences over {0,1,2} with length <= max_len.
std::vector<std::vector<TokenId>> all_sequences(std::size_t max_len)
{
    std::vector<std::vector<TokenId>> out{{}};
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        if (out[i].size() == max_len)
        {
            continue;
        }
        for (TokenId t = 0; t < 3; ++t)
        {
            auto next = out[i];
            next.push_back(t);
            out.push_back(std::move(next));
        }
    }
    return out;
}

Verdict overlap_metric()
{
    // Every pair up to length 6 exhaustively; length 7-8 pairs by random sampling.
    auto const seqs = all_sequences(6);
    std::size_t checked = 0;
    for (auto const& a : seqs)
    {
        for (auto const& b : seqs)
        {
            if (lcs_length(a, b) != oracle::lcs_enumerate(a, b))
            {
                return {false, "mismatch on an exhaustive pair"};
            }
            ++checked;
        }
    }
    std::mt19937_64 rng(9);
    std::size_t sampled = 0;
    for (; sampled < 200000; ++sampled)
    {
        std::vector<TokenId> a(7 + rng() % 2);
        std::vector<TokenId> b(rng() % 9);
        for (auto& t : a)
        {
            t = static_cast<TokenId>(rng() % 3);
        }
        for (auto& t : b)
        {
            t = static_cast<TokenId>(rng() % 3);
        }
        if (rng() % 2 == 0)
        {
            std::swap(a, b);
        }
        if (lcs_length(a, b) != oracle::lcs_enumerate(a, b))
        {
            return {false, "mismatch on a sampled pair"};
        }
        if (!b.empty() && std::abs(overlap_ratio(a, b) - static_cast<double>(oracle::lcs_enumerate(a, b)) / static_cast<double>(b.size())) > 0.0)
        {
            return {false, "ratio mismatch"};
        }
    }
    return {true, fmt("%zu exhaustive pairs (length <= 6), %zu sampled pairs (length 7-8)", checked, sampled)};
}

Verdict determinism()
{
    auto const& s = copy_setup();
    std::vector<CorpusItem> corpus(s.synth.corpus.begin(), s.synth.corpus.begin() + 40);
    RunOptions o = s.options;
    auto const first = format_report(ablate(s.model, corpus, o), false);
    o.jobs = 1;
    auto const second = format_report(ablate(s.model, corpus, o), false);
    auto const problem = validate_report(first);
    return {first == second && !problem,
        problem ? *problem : fmt("%zu bytes, identical across runs", first.size())};
}

} // namespace

int main()
{
    std::vector<std::pair<char const*, std::function<Verdict()>>> const criteria{
        {"strict output equals greedy decoding", lossless},
        {"adaptive(alpha=0, beta=1) equals strict on a tie-free model", reduction},
        {"adaptive threshold examples", threshold_formula},
        {"single-pass tree verification equals per-path verification", tree_path_equivalence},
        {"draft pool agrees with brute-force scan", pool_oracle},
        {"directional MAL on the copy corpus", directional_mal},
        {"fixed-threshold sweep is monotone", monotone_sweep},
        {"aligned tokens are accepted more often than misaligned", alignment_analysis},
        {"LCS overlap matches enumeration", overlap_metric},
        {"reports are byte-identical across runs", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        Verdict v;
        try
        {
            v = criteria[i].second();
        }
        catch (std::exception const& e)
        {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.ok ? 0 : 1;
        std::printf("%s %zu: %s (%s)\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
