// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/draft_pool.hpp"

#include <algorithm>

namespace ctxspec
{

std::size_t DraftPool::KeyHash::operator()(Key const& key) const noexcept
{
    // FNV-1a over the token ids.
    std::size_t h = 1469598103934665603ull;
    for (TokenId t : key)
    {
        h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(t));
        h *= 1099511628211ull;
    }
    return h;
}

DraftPool DraftPool::build(std::span<TokenId const> seq, std::size_t max_key_len)
{
    if (seq.empty())
    {
        throw Error(ErrorCode::EmptySequence, "cannot build a draft pool over an empty sequence");
    }
    if (max_key_len == 0)
    {
        throw Error(ErrorCode::BadConfig, "max_key_len must be positive");
    }
    DraftPool pool(max_key_len);
    pool.indexed_.assign(seq.begin(), seq.end());
    pool.index_range(0, seq.size());
    return pool;
}

void DraftPool::extend(std::span<TokenId const> seq)
{
    std::size_t const old_len = indexed_.size();
    if (seq.size() < old_len || !std::equal(indexed_.begin(), indexed_.end(), seq.begin()))
    {
        throw Error(ErrorCode::PrefixMutated, "indexed prefix differs from the sequence being extended");
    }
    if (seq.size() == old_len)
    {
        return;
    }
    indexed_.insert(indexed_.end(), seq.begin() + static_cast<std::ptrdiff_t>(old_len), seq.end());
    index_range(old_len, seq.size());
}

void DraftPool::index_range(std::size_t first_end, std::size_t last_end)
{
    // Windows ending at v in (first_end, last_end]; ascending v keeps each list sorted.
    Key key;
    for (std::size_t v = first_end + 1; v <= last_end; ++v)
    {
        std::size_t const longest = std::min(max_key_len_, v);
        for (std::size_t k = 1; k <= longest; ++k)
        {
            key.assign(indexed_.begin() + static_cast<std::ptrdiff_t>(v - k),
                indexed_.begin() + static_cast<std::ptrdiff_t>(v));
            index_[key].push_back(v);
        }
    }
}

std::optional<PoolMatch> DraftPool::lookup_longest(
    std::span<TokenId const> seq, std::size_t max_candidates, std::size_t min_key_len) const
{
    std::size_t const len = seq.size();
    std::size_t const longest = std::min(max_key_len_, len);
    std::size_t const shortest = std::max<std::size_t>(min_key_len, 1);
    Key key;
    for (std::size_t k = longest; k >= shortest && k > 0; --k)
    {
        key.assign(seq.end() - static_cast<std::ptrdiff_t>(k), seq.end());
        auto it = index_.find(key);
        if (it == index_.end())
        {
            continue;
        }
        std::vector<std::size_t> kept;
        kept.reserve(it->second.size());
        for (std::size_t v : it->second)
        {
            if (v < len)
            {
                kept.push_back(v);
            }
        }
        if (kept.empty())
        {
            continue;
        }
        if (max_candidates > 0 && kept.size() > max_candidates)
        {
            kept.erase(kept.begin(), kept.end() - static_cast<std::ptrdiff_t>(max_candidates));
        }
        return PoolMatch{k, std::move(kept)};
    }
    return std::nullopt;
}

std::span<std::size_t const> DraftPool::positions(std::span<TokenId const> key) const
{
    auto it = index_.find(Key(key.begin(), key.end()));
    if (it == index_.end())
    {
        return {};
    }
    return it->second;
}

std::map<DraftPool::Key, std::vector<std::size_t>> DraftPool::snapshot() const
{
    return {index_.begin(), index_.end()};
}

} // namespace ctxspec
