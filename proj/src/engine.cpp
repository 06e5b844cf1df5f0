// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/engine.hpp"

#include <algorithm>
#include <chrono>

namespace ctxspec
{

Session::Session(LanguageModel const& model, EngineConfig config, std::vector<TokenId> prompt)
    : model_(model)
    , config_(std::move(config))
    , eos_(config_.eos.value_or(model.default_eos()))
    , cache_(config_.cache_topk)
{
    config_.validate();
    if (prompt.empty())
    {
        throw Error(ErrorCode::EmptySequence, "prompt must contain at least one token");
    }
    seq_.prompt_len = prompt.size();
    seq_.tokens = std::move(prompt);
    validate_sequence(seq_, model_.vocab_size());
    if (static_cast<std::size_t>(eos_) >= model_.vocab_size())
    {
        throw Error(ErrorCode::BadConfig, "eos id outside the model vocabulary");
    }
}

void Session::prefill()
{
    if (prefilled_)
    {
        return;
    }
    auto const dists = model_.prefill(seq_.tokens);
    for (std::size_t i = 0; i < dists.size(); ++i)
    {
        cache_.put(i + 1, dists[i]);
    }
    pool_ = DraftPool::build(seq_.tokens, config_.max_key_len);
    prefilled_ = true;
    hit_eos_ = std::find(seq_.generated().begin(), seq_.generated().end(), eos_) != seq_.generated().end();
}

bool Session::finished() const noexcept
{
    return hit_eos_ || generated_count() >= config_.max_new_tokens;
}

StepRecord Session::step()
{
    prefill();
    auto const started = std::chrono::steady_clock::now();

    DraftTree const tree = draft(seq_, *pool_, cache_, DraftSettings::from(config_));
    TreeMask const mask = tree_mask(tree);
    auto const dists = model_.forward_tree(seq_.tokens, tree, mask);
    VerifyOutcome const outcome = verify_tree(tree, dists, VerifyParams::from(config_));

    std::size_t const budget = config_.max_new_tokens - std::min(config_.max_new_tokens, generated_count());
    std::vector<std::size_t> path = outcome.accepted_path;
    std::optional<TokenId> bonus = outcome.bonus;

    // Leave room for the bonus token; its distribution sits at the clipped path end.
    if (budget > 0 && path.size() + 1 > budget)
    {
        path.resize(budget - 1);
        bonus = argmax(dists[path.empty() ? 0 : path.back()]).token;
    }
    for (std::size_t i = 0; i < path.size(); ++i)
    {
        if (tree.node(path[i]).token == eos_)
        {
            path.resize(i + 1);
            bonus.reset();
            break;
        }
    }

    StepRecord rec;
    rec.drafted = tree.size() - 1;
    rec.accepted = path.size();
    rec.bonus = bonus;
    rec.tree_depth = tree.depth();
    rec.nodes.reserve(rec.drafted);
    std::vector<char> on_path(tree.size(), 0);
    for (std::size_t n : path)
    {
        on_path[n] = 1;
    }
    for (std::size_t i = 1; i < tree.size(); ++i)
    {
        auto const& node = tree.node(i);
        auto const& verdict = outcome.verdicts[i];
        NodeRecord nr;
        nr.token = node.token;
        nr.origin = node.origin;
        nr.depth = node.depth;
        nr.prob = verdict.prob;
        nr.threshold = verdict.threshold;
        nr.passed = verdict.accepted;
        nr.committed = on_path[i] != 0;
        if (node.origin == Origin::InputContext && node.source_pos)
        {
            if (Distribution const* cached = cache_.find(*node.source_pos); cached && !cached->support.empty())
            {
                nr.aligned = cached->support.front() == node.token;
            }
        }
        rec.nodes.push_back(nr);
    }

    // Only distributions conditioned on committed tokens are kept.
    std::size_t const base = seq_.size();
    cache_.put(base, dists[0]);
    for (std::size_t i = 0; i < path.size(); ++i)
    {
        cache_.put(base + i + 1, dists[path[i]]);
    }
    for (std::size_t n : path)
    {
        seq_.tokens.push_back(tree.node(n).token);
    }
    if (bonus)
    {
        seq_.tokens.push_back(*bonus);
    }
    hit_eos_ = (!bonus && !path.empty()) || (bonus && *bonus == eos_);
    pool_->extend(seq_.tokens);

    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    records_.push_back(rec);
    return rec;
}

Session::Result Session::generate()
{
    prefill();
    std::vector<StepRecord> steps;
    while (!finished())
    {
        steps.push_back(step());
    }
    return {seq_, std::move(steps)};
}

Metrics metrics(std::vector<StepRecord> const& records)
{
    if (records.empty())
    {
        throw Error(ErrorCode::EmptyRecords, "metrics need at least one step record");
    }
    Metrics m;
    m.steps = records.size();
    for (auto const& rec : records)
    {
        m.tokens += rec.emitted();
        m.wall_ms += rec.wall_ms;
        for (auto const& n : rec.nodes)
        {
            OriginRate* bucket = nullptr;
            switch (n.origin)
            {
            case Origin::InputContext: bucket = &m.input; break;
            case Origin::GeneratedContext: bucket = &m.generated; break;
            case Origin::AlignmentSampled: bucket = &m.sampled; break;
            case Origin::Root: break;
            }
            if (bucket != nullptr)
            {
                ++bucket->drafted;
                bucket->accepted += n.committed ? 1 : 0;
            }
            if (n.aligned)
            {
                OriginRate& split = *n.aligned ? m.aligned : m.misaligned;
                ++split.drafted;
                split.accepted += n.committed ? 1 : 0;
            }
        }
    }
    m.mal = static_cast<double>(m.tokens) / static_cast<double>(m.steps);
    return m;
}

} // namespace ctxspec
