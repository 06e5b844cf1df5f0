// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/drafter.hpp"

#include <algorithm>

namespace ctxspec
{

std::string_view to_string(Origin origin)
{
    switch (origin)
    {
    case Origin::Root: return "root";
    case Origin::InputContext: return "input";
    case Origin::GeneratedContext: return "generated";
    case Origin::AlignmentSampled: return "sampled";
    }
    return "unknown";
}

void AlignmentCache::put(std::size_t prefix_len, Distribution const& full)
{
    if (prefix_len >= entries_.size())
    {
        entries_.resize(prefix_len + 1);
    }
    auto& slot = entries_[prefix_len];
    if (!slot)
    {
        ++count_;
    }
    slot = full.kind == DistKind::TruncatedTopK && full.size() <= topk_ ? full : truncate_topk(full, topk_);
}

Distribution const* AlignmentCache::find(std::size_t prefix_len) const
{
    if (prefix_len >= entries_.size() || !entries_[prefix_len])
    {
        return nullptr;
    }
    return &*entries_[prefix_len];
}

std::vector<Candidate> collect_candidates(TokenSeq const& seq, PoolMatch const& match, std::size_t ngram_len)
{
    std::vector<Candidate> out;
    out.reserve(match.positions.size());
    for (auto it = match.positions.rbegin(); it != match.positions.rend(); ++it)
    {
        std::size_t const start = *it;
        if (start >= seq.size() || ngram_len == 0)
        {
            continue;
        }
        std::size_t const stop = std::min(seq.size(), start + ngram_len);
        Candidate c;
        for (std::size_t pos = start; pos < stop; ++pos)
        {
            c.tokens.push_back(seq.tokens[pos]);
            c.source_pos.push_back(pos);
            c.origins.push_back(pos < seq.prompt_len ? Origin::InputContext : Origin::GeneratedContext);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Candidate> collect_candidates(TokenSeq const& seq, DraftPool const& pool, std::size_t ngram_len,
    std::size_t max_candidates, std::size_t min_key_len)
{
    auto match = pool.lookup_longest(seq.view(), max_candidates, min_key_len);
    if (!match)
    {
        return {};
    }
    return collect_candidates(seq, *match, ngram_len);
}

std::vector<Expansion> align_expand(Candidate const& candidate, AlignmentCache const& cache, std::size_t max_expansion)
{
    std::vector<Expansion> out;
    if (max_expansion == 0)
    {
        return out;
    }
    for (std::size_t slot = 0; slot < candidate.size(); ++slot)
    {
        Distribution const* d = cache.find(candidate.source_pos[slot]);
        if (d == nullptr || d->support.empty())
        {
            continue;
        }
        // Cached entries are sorted, so the support index is the rank minus one.
        auto const it = std::find(d->support.begin(), d->support.end(), candidate.tokens[slot]);
        std::size_t const ahead = static_cast<std::size_t>(it - d->support.begin());
        if (ahead == 0)
        {
            continue;
        }
        std::size_t const take = std::min(ahead, max_expansion);
        Expansion e;
        e.slot = slot;
        e.tokens.assign(d->support.begin(), d->support.begin() + static_cast<std::ptrdiff_t>(take));
        out.push_back(std::move(e));
    }
    return out;
}

DraftTree::DraftTree(TokenId root_token)
{
    nodes_.push_back(DraftNode{root_token, -1, Origin::Root, std::nullopt, 0});
    children_.emplace_back();
}

std::optional<std::size_t> DraftTree::find_child(std::size_t parent, TokenId token) const
{
    for (std::size_t c : children_.at(parent))
    {
        if (nodes_[c].token == token)
        {
            return c;
        }
    }
    return std::nullopt;
}

std::size_t DraftTree::add_child(std::size_t parent, TokenId token, Origin origin, std::optional<std::size_t> source_pos)
{
    if (auto existing = find_child(parent, token))
    {
        return *existing;
    }
    std::size_t const depth = nodes_.at(parent).depth + 1;
    nodes_.push_back(DraftNode{token, static_cast<std::int32_t>(parent), origin, source_pos, depth});
    children_.emplace_back();
    std::size_t const id = nodes_.size() - 1;
    children_[parent].push_back(id);
    max_depth_ = std::max(max_depth_, depth);
    return id;
}

std::vector<std::size_t> DraftTree::layer_counts() const
{
    std::vector<std::size_t> counts(max_depth_, 0);
    for (std::size_t i = 1; i < nodes_.size(); ++i)
    {
        ++counts[nodes_[i].depth - 1];
    }
    return counts;
}

std::vector<std::size_t> DraftTree::path_to(std::size_t i) const
{
    std::vector<std::size_t> path;
    for (std::int32_t cur = static_cast<std::int32_t>(i); cur > 0; cur = nodes_.at(static_cast<std::size_t>(cur)).parent)
    {
        path.push_back(static_cast<std::size_t>(cur));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<TokenId> DraftTree::path_tokens(std::size_t i) const
{
    std::vector<TokenId> tokens;
    for (std::size_t n : path_to(i))
    {
        tokens.push_back(nodes_[n].token);
    }
    return tokens;
}

DraftTree build_tree(
    TokenId root_token, std::vector<Candidate> const& candidates, std::vector<std::vector<Expansion>> const& expansions)
{
    DraftTree tree(root_token);
    std::vector<std::vector<std::size_t>> slot_nodes(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
    {
        auto const& cand = candidates[c];
        std::size_t parent = 0;
        for (std::size_t slot = 0; slot < cand.size(); ++slot)
        {
            Origin const origin = slot < cand.origins.size() ? cand.origins[slot] : Origin::InputContext;
            std::optional<std::size_t> src;
            if (slot < cand.source_pos.size())
            {
                src = cand.source_pos[slot];
            }
            parent = tree.add_child(parent, cand.tokens[slot], origin, src);
            slot_nodes[c].push_back(parent);
        }
    }
    for (std::size_t c = 0; c < expansions.size() && c < candidates.size(); ++c)
    {
        for (auto const& e : expansions[c])
        {
            if (e.slot >= slot_nodes[c].size())
            {
                continue;
            }
            std::size_t const parent = e.slot == 0 ? 0 : slot_nodes[c][e.slot - 1];
            for (TokenId t : e.tokens)
            {
                tree.add_child(parent, t, Origin::AlignmentSampled, std::nullopt);
            }
        }
    }
    return tree;
}

TreeMask tree_mask(DraftTree const& tree)
{
    std::size_t const n = tree.size();
    TreeMask mask(n);
    auto const& nodes = tree.nodes();
    for (std::size_t i = 0; i < n; ++i)
    {
        if (nodes[i].parent >= 0)
        {
            auto const p = static_cast<std::size_t>(nodes[i].parent);
            // Parents precede children, so the parent's row is complete.
            for (std::size_t j = 0; j <= p; ++j)
            {
                if (mask(p, j))
                {
                    mask.set(i, j);
                }
            }
        }
        mask.set(i, i);
    }
    return mask;
}

DraftSettings DraftSettings::from(EngineConfig const& cfg)
{
    DraftSettings s;
    s.ngram_len = cfg.ngram_len;
    s.max_candidates = cfg.max_candidates;
    s.min_key_len = cfg.min_key_len;
    s.max_expansion = cfg.max_expansion;
    s.alignment_sampling = cfg.alignment_sampling;
    return s;
}

DraftTree draft(TokenSeq const& seq, DraftPool const& pool, AlignmentCache const& cache, DraftSettings const& settings)
{
    auto candidates = collect_candidates(seq, pool, settings.ngram_len, settings.max_candidates, settings.min_key_len);
    std::vector<std::vector<Expansion>> expansions;
    if (settings.alignment_sampling && settings.max_expansion > 0)
    {
        expansions.reserve(candidates.size());
        for (auto const& c : candidates)
        {
            expansions.push_back(align_expand(c, cache, settings.max_expansion));
        }
    }
    return build_tree(seq.tokens.back(), candidates, expansions);
}

} // namespace ctxspec
