// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace ctxspec
{
namespace
{

using nlohmann::json;

void add(OriginRate& into, OriginRate const& from)
{
    into.drafted += from.drafted;
    into.accepted += from.accepted;
}

ItemResult run_item(LanguageModel const& model, CorpusItem const& item, RunOptions const& options)
{
    Session session(model, options.config, item.prompt);
    auto result = session.generate();
    Metrics const m = metrics(result.steps);

    ItemResult r;
    r.id = item.id;
    auto const gen = result.sequence.generated();
    r.output.assign(gen.begin(), gen.end());
    r.tokens_emitted = m.tokens;
    r.steps = m.steps;
    r.mal = m.mal;
    r.input = m.input;
    r.generated = m.generated;
    r.sampled = m.sampled;
    r.aligned = m.aligned;
    r.misaligned = m.misaligned;
    r.wall_ms = m.wall_ms;
    if (item.reference)
    {
        std::vector<TokenId> trimmed = r.output;
        if (!trimmed.empty() && trimmed.back() == session.eos())
        {
            trimmed.pop_back();
        }
        r.exact_match = trimmed == *item.reference;
        if (!item.reference->empty())
        {
            r.token_overlap = overlap_ratio(trimmed, *item.reference);
        }
    }
    if (options.check_greedy)
    {
        TokenSeq prompt{item.prompt, item.prompt.size()};
        auto const oracle = greedy_decode(model, prompt, options.config.max_new_tokens, session.eos());
        r.matches_greedy = oracle.tokens == result.sequence.tokens;
    }
    return r;
}

Aggregate aggregate_items(std::vector<ItemResult> const& items)
{
    Aggregate a;
    a.items = items.size();
    std::size_t with_ref = 0;
    std::size_t exact = 0;
    std::size_t with_overlap = 0;
    double overlap_sum = 0.0;
    double mal_sum = 0.0;
    bool any_greedy = false;
    bool all_greedy = true;
    for (auto const& it : items)
    {
        mal_sum += it.mal;
        a.tokens += it.tokens_emitted;
        a.steps += it.steps;
        add(a.input, it.input);
        add(a.generated, it.generated);
        add(a.sampled, it.sampled);
        add(a.aligned, it.aligned);
        add(a.misaligned, it.misaligned);
        a.wall_ms += it.wall_ms;
        if (it.exact_match)
        {
            ++with_ref;
            exact += *it.exact_match ? 1 : 0;
        }
        if (it.token_overlap)
        {
            ++with_overlap;
            overlap_sum += *it.token_overlap;
        }
        if (it.matches_greedy)
        {
            any_greedy = true;
            all_greedy = all_greedy && *it.matches_greedy;
        }
    }
    if (!items.empty())
    {
        a.mal = mal_sum / static_cast<double>(items.size());
    }
    if (a.steps > 0)
    {
        a.pooled_mal = static_cast<double>(a.tokens) / static_cast<double>(a.steps);
    }
    if (with_ref > 0)
    {
        a.exact_match_rate = static_cast<double>(exact) / static_cast<double>(with_ref);
    }
    if (with_overlap > 0)
    {
        a.token_overlap = overlap_sum / static_cast<double>(with_overlap);
    }
    if (any_greedy)
    {
        a.lossless = all_greedy;
    }
    return a;
}

json opt(std::optional<double> v)
{
    return v ? json(*v) : json(nullptr);
}

json opt(std::optional<bool> v)
{
    return v ? json(*v) : json(nullptr);
}

json counts_json(OriginRate const& r)
{
    return json::array({r.drafted, r.accepted});
}

void put_rates(json& rec, OriginRate const& input, OriginRate const& generated, OriginRate const& sampled,
    OriginRate const& aligned, OriginRate const& misaligned)
{
    rec["acc_rate_input"] = opt(input.rate());
    rec["acc_rate_generated"] = opt(generated.rate());
    rec["acc_rate_sampled"] = opt(sampled.rate());
    rec["aligned_acc"] = opt(aligned.rate());
    rec["misaligned_acc"] = opt(misaligned.rate());
    rec["counts"] = {{"input", counts_json(input)}, {"generated", counts_json(generated)},
        {"sampled", counts_json(sampled)}, {"aligned", counts_json(aligned)}, {"misaligned", counts_json(misaligned)}};
}

json config_json(RunReport const& run)
{
    auto const& c = run.config;
    json rec;
    rec["kind"] = "config";
    rec["mode"] = run.mode;
    rec["threshold"] = opt(run.threshold);
    rec["verification"] = c.mode.to_string();
    rec["alpha"] = c.alpha;
    rec["beta"] = c.beta;
    rec["ngram_len"] = c.ngram_len;
    rec["max_key_len"] = c.max_key_len;
    rec["min_key_len"] = c.min_key_len;
    rec["max_expansion"] = c.max_expansion;
    rec["alignment_sampling"] = c.alignment_sampling;
    rec["cache_topk"] = c.cache_topk;
    rec["max_candidates"] = c.max_candidates;
    rec["max_new"] = c.max_new_tokens;
    rec["seed"] = c.seed;
    return rec;
}

RunReport labelled(std::string mode, RunReport report)
{
    report.mode = std::move(mode);
    return report;
}

} // namespace

RunReport run_corpus(LanguageModel const& model, std::vector<CorpusItem> const& corpus, RunOptions const& options)
{
    if (corpus.empty())
    {
        throw Error(ErrorCode::BadCorpus, "corpus holds no items");
    }
    options.config.validate();

    std::vector<ItemResult> results(corpus.size());
    std::size_t const workers = std::max<std::size_t>(1, std::min(options.jobs, corpus.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&]
    {
        for (std::size_t i = next++; i < corpus.size(); i = next++)
        {
            try
            {
                results[i] = run_item(model, corpus[i], options);
            }
            catch (...)
            {
                std::lock_guard lock(failure_mu);
                if (!failure)
                {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (workers == 1)
    {
        work();
    }
    else
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
        {
            pool.emplace_back(work);
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }

    std::sort(results.begin(), results.end(), [](ItemResult const& a, ItemResult const& b) { return a.id < b.id; });
    RunReport report;
    report.mode = options.config.mode.to_string();
    report.config = options.config;
    report.aggregate = aggregate_items(results);
    report.items = std::move(results);
    return report;
}

std::vector<RunReport> ablate(LanguageModel const& model, std::vector<CorpusItem> const& corpus, RunOptions const& options)
{
    std::vector<RunReport> out;
    auto with = [&](VerificationMode mode, bool alignment_sampling)
    {
        RunOptions o = options;
        o.config.mode = mode;
        o.config.alignment_sampling = alignment_sampling;
        return o;
    };
    out.push_back(labelled("full", run_corpus(model, corpus, with(VerificationMode::adaptive(), true))));
    out.push_back(labelled("no-as", run_corpus(model, corpus, with(VerificationMode::adaptive(), false))));
    out.push_back(labelled("no-cv", run_corpus(model, corpus, with(VerificationMode::strict(), true))));
    out.push_back(labelled("fixed:0.1", run_corpus(model, corpus, with(VerificationMode::fixed(0.1), true))));
    out.push_back(labelled("topk:5", run_corpus(model, corpus, with(VerificationMode::top_k(5), true))));
    return out;
}

std::vector<RunReport> sweep(LanguageModel const& model, std::vector<CorpusItem> const& corpus,
    std::vector<double> const& thresholds, RunOptions const& options)
{
    if (thresholds.empty())
    {
        throw Error(ErrorCode::BadConfig, "sweep needs at least one threshold");
    }
    std::vector<RunReport> out;
    for (double t : thresholds)
    {
        RunOptions o = options;
        o.config.mode = VerificationMode::fixed(t);
        RunReport r = run_corpus(model, corpus, o);
        r.threshold = t;
        out.push_back(std::move(r));
    }
    return out;
}

OverlapReport overlap(std::vector<CorpusItem> const& corpus, OverlapKind kind)
{
    if (corpus.empty())
    {
        throw Error(ErrorCode::BadCorpus, "corpus holds no items");
    }
    OverlapReport report;
    report.kind = kind;
    double total = 0.0;
    for (auto const& item : corpus)
    {
        if (!item.reference)
        {
            throw Error(ErrorCode::MissingReference, "item '" + item.id + "' has no reference");
        }
        double const r = overlap_ratio(item.prompt, *item.reference, kind);
        report.items.push_back({item.id, r});
        total += r;
    }
    std::sort(report.items.begin(), report.items.end(),
        [](OverlapRow const& a, OverlapRow const& b) { return a.id < b.id; });
    report.mean = total / static_cast<double>(corpus.size());
    return report;
}

std::string format_report(std::vector<RunReport> const& runs, bool timing)
{
    std::string out;
    auto emit = [&](json const& rec)
    {
        out += rec.dump();
        out += '\n';
    };
    for (auto const& run : runs)
    {
        emit(config_json(run));
        for (auto const& it : run.items)
        {
            json rec;
            rec["kind"] = "item";
            rec["mode"] = run.mode;
            rec["id"] = it.id;
            rec["tokens_emitted"] = it.tokens_emitted;
            rec["steps"] = it.steps;
            rec["mal"] = it.mal;
            put_rates(rec, it.input, it.generated, it.sampled, it.aligned, it.misaligned);
            rec["exact_match"] = opt(it.exact_match);
            rec["token_overlap"] = opt(it.token_overlap);
            rec["matches_greedy"] = opt(it.matches_greedy);
            rec["wall_ms"] = timing ? it.wall_ms : 0.0;
            emit(rec);
        }
        auto const& a = run.aggregate;
        json rec;
        rec["kind"] = "aggregate";
        rec["mode"] = run.mode;
        rec["threshold"] = opt(run.threshold);
        rec["items"] = a.items;
        rec["tokens_emitted"] = a.tokens;
        rec["steps"] = a.steps;
        rec["mal"] = a.mal;
        rec["pooled_mal"] = a.pooled_mal;
        put_rates(rec, a.input, a.generated, a.sampled, a.aligned, a.misaligned);
        rec["exact_match_rate"] = opt(a.exact_match_rate);
        rec["token_overlap"] = opt(a.token_overlap);
        rec["lossless"] = opt(a.lossless);
        rec["wall_ms"] = timing ? a.wall_ms : 0.0;
        rec["tokens_per_s"] = timing && a.wall_ms > 0.0
            ? json(static_cast<double>(a.tokens) * 1000.0 / a.wall_ms)
            : json(nullptr);
        emit(rec);
    }
    return out;
}

std::string format_overlap(OverlapReport const& report)
{
    std::string out;
    std::string const kind = report.kind == OverlapKind::Subsequence ? "subsequence" : "substring";
    for (auto const& row : report.items)
    {
        out += json{{"kind", "overlap_item"}, {"variant", kind}, {"id", row.id}, {"ratio", row.ratio}}.dump();
        out += '\n';
    }
    out += json{{"kind", "overlap_mean"}, {"variant", kind}, {"items", report.items.size()}, {"mean", report.mean}}
               .dump();
    out += '\n';
    return out;
}

std::optional<std::string> validate_report(std::string const& text)
{
    static std::vector<std::string> const item_fields{"id", "tokens_emitted", "steps", "mal", "acc_rate_input",
        "acc_rate_generated", "acc_rate_sampled", "aligned_acc", "misaligned_acc", "exact_match", "wall_ms", "counts"};
    static std::vector<std::string> const agg_fields{"items", "tokens_emitted", "steps", "mal", "pooled_mal",
        "acc_rate_input", "aligned_acc", "misaligned_acc", "exact_match_rate", "lossless", "wall_ms", "counts"};

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool in_run = false;
    std::string mode;
    std::size_t items = 0;
    std::size_t tokens = 0;
    std::size_t steps = 0;
    double mal_sum = 0.0;
    std::size_t runs = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        std::string const where = "line " + std::to_string(lineno) + ": ";
        json rec;
        try
        {
            rec = json::parse(line);
        }
        catch (json::exception const&)
        {
            return where + "not JSON";
        }
        if (!rec.is_object() || !rec.contains("kind") || !rec["kind"].is_string())
        {
            return where + "missing kind";
        }
        std::string const kind = rec["kind"];
        if (kind == "config")
        {
            if (in_run)
            {
                return where + "config before the previous run's aggregate";
            }
            in_run = true;
            mode = rec.value("mode", "");
            items = tokens = steps = 0;
            mal_sum = 0.0;
            continue;
        }
        if (!in_run || rec.value("mode", "") != mode)
        {
            return where + "record outside its run";
        }
        auto const& fields = kind == "item" ? item_fields : agg_fields;
        if (kind != "item" && kind != "aggregate")
        {
            return where + "unknown kind '" + kind + "'";
        }
        for (auto const& f : fields)
        {
            if (!rec.contains(f))
            {
                return where + "missing field '" + f + "'";
            }
        }
        if (!rec["steps"].is_number_unsigned() || !rec["tokens_emitted"].is_number_unsigned()
            || !rec["mal"].is_number())
        {
            return where + "numeric fields have the wrong type";
        }
        if (kind == "item")
        {
            ++items;
            tokens += rec["tokens_emitted"].get<std::size_t>();
            steps += rec["steps"].get<std::size_t>();
            mal_sum += rec["mal"].get<double>();
            double const mal = rec["mal"];
            if (rec["steps"].get<std::size_t>() > 0
                && std::abs(mal - rec["tokens_emitted"].get<double>() / rec["steps"].get<double>()) > 1e-9)
            {
                return where + "item mal disagrees with tokens/steps";
            }
            continue;
        }
        if (rec["items"].get<std::size_t>() != items || rec["tokens_emitted"].get<std::size_t>() != tokens
            || rec["steps"].get<std::size_t>() != steps)
        {
            return where + "aggregate counts disagree with its items";
        }
        if (items > 0 && std::abs(rec["mal"].get<double>() - mal_sum / static_cast<double>(items)) > 1e-9)
        {
            return where + "aggregate mal is not the mean of item mal";
        }
        in_run = false;
        ++runs;
    }
    if (in_run)
    {
        return std::string("report ends inside a run");
    }
    if (runs == 0)
    {
        return std::string("report holds no runs");
    }
    return std::nullopt;
}

} // namespace ctxspec
