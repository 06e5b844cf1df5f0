// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/core.hpp"
#include "ctxspec/draft_pool.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ctxspec
{

enum class Origin : std::uint8_t
{
    Root,
    InputContext,
    GeneratedContext,
    AlignmentSampled,
};

std::string_view to_string(Origin origin);

/// Per-position next-token distributions, truncated to the top K.
///
/// Keyed by prefix length: entry i is p(. | x_0 .. x_{i-1}), the distribution that predicted
/// the token at 0-based position i.
class AlignmentCache
{
public:
    explicit AlignmentCache(std::size_t topk = 8)
        : topk_(topk)
    {
    }

    void put(std::size_t prefix_len, Distribution const& full);
    Distribution const* find(std::size_t prefix_len) const;

    std::size_t topk() const noexcept
    {
        return topk_;
    }
    std::size_t entry_count() const noexcept
    {
        return count_;
    }
    // One past the largest prefix length with an entry.
    std::size_t extent() const noexcept
    {
        return entries_.size();
    }

private:
    std::size_t topk_;
    std::size_t count_ = 0;
    std::vector<std::optional<Distribution>> entries_;
};

// A retrieved continuation: tokens[i] was copied from sequence position source_pos[i].
struct Candidate
{
    std::vector<TokenId> tokens;
    std::vector<std::size_t> source_pos;
    std::vector<Origin> origins;

    std::size_t size() const noexcept
    {
        return tokens.size();
    }
};

// seq[v : v + n] for each matched end position v, most recent first.
std::vector<Candidate> collect_candidates(TokenSeq const& seq, PoolMatch const& match, std::size_t ngram_len);

std::vector<Candidate> collect_candidates(
    TokenSeq const& seq, DraftPool const& pool, std::size_t ngram_len, std::size_t max_candidates,
    std::size_t min_key_len = 1);

struct Expansion
{
    std::size_t slot = 0; // index into the candidate
    std::vector<TokenId> tokens; // best rank first
};

// For every slot whose copied token is not the cached top-1, the tokens ranked above it
// (capped at max_expansion). Slots without a cached distribution are left alone.
std::vector<Expansion> align_expand(Candidate const& candidate, AlignmentCache const& cache, std::size_t max_expansion);

struct DraftNode
{
    TokenId token = 0;
    std::int32_t parent = -1; // -1 for the root
    Origin origin = Origin::Root;
    std::optional<std::size_t> source_pos;
    std::size_t depth = 0;
};

/// Trie of draft continuations rooted at the last committed token.
///
/// Nodes are stored in insertion order, which is topological (parents precede children).
class DraftTree
{
public:
    explicit DraftTree(TokenId root_token);

    // Returns the existing child when (parent, token) is already present.
    std::size_t add_child(std::size_t parent, TokenId token, Origin origin, std::optional<std::size_t> source_pos);

    std::optional<std::size_t> find_child(std::size_t parent, TokenId token) const;

    std::vector<DraftNode> const& nodes() const noexcept
    {
        return nodes_;
    }
    DraftNode const& node(std::size_t i) const
    {
        return nodes_.at(i);
    }
    std::size_t size() const noexcept
    {
        return nodes_.size();
    }
    std::vector<std::size_t> const& children(std::size_t i) const
    {
        return children_.at(i);
    }
    std::size_t depth() const noexcept
    {
        return max_depth_;
    }
    // Node count per depth, excluding the root.
    std::vector<std::size_t> layer_counts() const;

    // Node indices from the first layer down to i (root excluded).
    std::vector<std::size_t> path_to(std::size_t i) const;
    std::vector<TokenId> path_tokens(std::size_t i) const;

private:
    std::vector<DraftNode> nodes_;
    std::vector<std::vector<std::size_t>> children_;
    std::size_t max_depth_ = 0;
};

// Candidates as root-anchored trie paths in the given order, then each candidate's expansions
// as leaf siblings at their slot. expansions is either empty or parallel to candidates.
DraftTree build_tree(
    TokenId root_token, std::vector<Candidate> const& candidates, std::vector<std::vector<Expansion>> const& expansions);

/// Ancestor-closure attention mask over the linearized tree: (i, j) set iff j == i or j is
/// an ancestor of i. Attention to the committed prefix is implicit.
class TreeMask
{
public:
    TreeMask() = default;
    explicit TreeMask(std::size_t n)
        : n_(n)
        , bits_(n * n, 0)
    {
    }

    bool operator()(std::size_t row, std::size_t col) const
    {
        return bits_[row * n_ + col] != 0;
    }
    void set(std::size_t row, std::size_t col)
    {
        bits_[row * n_ + col] = 1;
    }
    std::size_t size() const noexcept
    {
        return n_;
    }

    bool operator==(TreeMask const&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bits_;
};

TreeMask tree_mask(DraftTree const& tree);

struct DraftSettings
{
    std::size_t ngram_len = 6;
    std::size_t max_candidates = 4;
    std::size_t min_key_len = 1;
    std::size_t max_expansion = 2;
    bool alignment_sampling = true;

    static DraftSettings from(EngineConfig const& cfg);
};

// Retrieve, expand and merge: the full drafting stage for one decode step.
DraftTree draft(TokenSeq const& seq, DraftPool const& pool, AlignmentCache const& cache, DraftSettings const& settings);

} // namespace ctxspec
