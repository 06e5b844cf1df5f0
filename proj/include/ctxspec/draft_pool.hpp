// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/core.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace ctxspec
{

struct PoolMatch
{
    std::size_t key_len = 0;
    // End positions v (the key sits at [v - key_len, v)), ascending.
    std::vector<std::size_t> positions;

    bool operator==(PoolMatch const&) const = default;
};

/// Sliding-window index over a token sequence.
///
/// Every window of length 1..max_key_len is recorded under its token tuple, valued by the
/// window's end position. Lookups probe the current suffix longest-first.
class DraftPool
{
public:
    using Key = std::vector<TokenId>;

    // Throws EmptySequence.
    static DraftPool build(std::span<TokenId const> seq, std::size_t max_key_len);

    // Indexes the windows that end inside the new tail. Throws PrefixMutated if the first
    // indexed_len() tokens differ from the ones already indexed.
    void extend(std::span<TokenId const> seq);

    /// Longest suffix of seq (length in [min_key_len, max_key_len]) with a usable match.
    ///
    /// A position equal to seq.size() has no continuation and is dropped; a key length whose
    /// positions are all dropped does not count as a hit. With max_candidates > 0 only the
    /// most recent positions are kept.
    std::optional<PoolMatch> lookup_longest(
        std::span<TokenId const> seq, std::size_t max_candidates = 0, std::size_t min_key_len = 1) const;

    std::size_t indexed_len() const noexcept
    {
        return indexed_.size();
    }
    std::size_t max_key_len() const noexcept
    {
        return max_key_len_;
    }
    std::size_t key_count() const noexcept
    {
        return index_.size();
    }

    // Positions recorded under key; empty if absent.
    std::span<std::size_t const> positions(std::span<TokenId const> key) const;

    // Sorted snapshot, for comparisons in tests.
    std::map<Key, std::vector<std::size_t>> snapshot() const;

private:
    struct KeyHash
    {
        std::size_t operator()(Key const& key) const noexcept;
    };

    explicit DraftPool(std::size_t max_key_len)
        : max_key_len_(max_key_len)
    {
    }

    void index_range(std::size_t first_end, std::size_t last_end);

    std::size_t max_key_len_;
    std::vector<TokenId> indexed_;
    std::unordered_map<Key, std::vector<std::size_t>, KeyHash> index_;
};

} // namespace ctxspec
