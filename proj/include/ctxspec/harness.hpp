// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/corpus.hpp"
#include "ctxspec/engine.hpp"
#include "ctxspec/models.hpp"
#include "ctxspec/overlap.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ctxspec
{

struct RunOptions
{
    EngineConfig config;
    std::size_t jobs = 1;
    bool timing = false;        // otherwise wall_ms/tokens_per_s are written as 0 / null
    bool check_greedy = true;   // compare every output with the autoregressive oracle
};

struct ItemResult
{
    std::string id;
    std::vector<TokenId> output; // generated tokens only
    std::size_t tokens_emitted = 0;
    std::size_t steps = 0;
    double mal = 0.0;
    OriginRate input;
    OriginRate generated;
    OriginRate sampled;
    OriginRate aligned;
    OriginRate misaligned;
    std::optional<bool> exact_match;      // needs a reference
    std::optional<double> token_overlap;  // LCS(output, reference) / |reference|
    std::optional<bool> matches_greedy;
    double wall_ms = 0.0;
};

struct Aggregate
{
    std::size_t items = 0;
    double mal = 0.0;        // mean of per-item MAL
    double pooled_mal = 0.0; // total tokens / total steps
    std::size_t tokens = 0;
    std::size_t steps = 0;
    OriginRate input;
    OriginRate generated;
    OriginRate sampled;
    OriginRate aligned;
    OriginRate misaligned;
    std::optional<double> exact_match_rate;
    std::optional<double> token_overlap;
    std::optional<bool> lossless; // all items matched the greedy oracle
    double wall_ms = 0.0;
};

struct RunReport
{
    std::string mode;                  // column label
    std::optional<double> threshold;   // sweep rows
    EngineConfig config;
    std::vector<ItemResult> items;     // ordered by id
    Aggregate aggregate;
};

// Throws BadCorpus on an empty corpus and BadConfig on an invalid configuration.
RunReport run_corpus(LanguageModel const& model, std::vector<CorpusItem> const& corpus, RunOptions const& options);

// Columns full (adaptive + alignment sampling), no-as, no-cv (strict), fixed:0.1, topk:5; same seed.
std::vector<RunReport> ablate(LanguageModel const& model, std::vector<CorpusItem> const& corpus, RunOptions const& options);

// One fixed-threshold run per threshold, in the given order.
std::vector<RunReport> sweep(LanguageModel const& model, std::vector<CorpusItem> const& corpus,
    std::vector<double> const& thresholds, RunOptions const& options);

struct OverlapRow
{
    std::string id;
    double ratio = 0.0;
};

struct OverlapReport
{
    OverlapKind kind = OverlapKind::Subsequence;
    std::vector<OverlapRow> items;
    double mean = 0.0;
};

// Prompt vs reference. Throws MissingReference if an item has none.
OverlapReport overlap(std::vector<CorpusItem> const& corpus, OverlapKind kind = OverlapKind::Subsequence);

/// JSON Lines report. Each run contributes one "config" record, one "item" record per item
/// and one "aggregate" record; see README for the field list.
std::string format_report(std::vector<RunReport> const& runs, bool timing);
std::string format_overlap(OverlapReport const& report);

// Checks required fields/types and recomputes each aggregate from its items.
// Returns a description of the first problem, or nullopt.
std::optional<std::string> validate_report(std::string const& text);

} // namespace ctxspec
