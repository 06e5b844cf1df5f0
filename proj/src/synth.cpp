// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace ctxspec
{
namespace
{

class MarkovLanguage
{
public:
    MarkovLanguage(CopyCorpusSpec const& spec)
        : spec_(spec)
    {
    }

    TokenId sample(std::span<TokenId const> history, std::mt19937_64& rng)
    {
        auto const& row = successors(history);
        std::discrete_distribution<std::size_t> pick(row.weights.begin(), row.weights.end());
        return row.tokens[pick(rng)];
    }

    std::vector<TokenId> walk(std::size_t len, std::mt19937_64& rng)
    {
        std::uniform_int_distribution<TokenId> any(0, static_cast<TokenId>(spec_.vocab) - 1);
        std::vector<TokenId> out;
        out.reserve(len);
        for (std::size_t i = 0; i < len; ++i)
        {
            out.push_back(out.size() < spec_.chain_order ? any(rng) : sample(out, rng));
        }
        return out;
    }

private:
    struct Row
    {
        std::vector<TokenId> tokens;
        std::vector<double> weights;
    };

    Row const& successors(std::span<TokenId const> history)
    {
        std::uint64_t state = 0;
        for (std::size_t i = history.size() - spec_.chain_order; i < history.size(); ++i)
        {
            state = state * spec_.vocab + static_cast<std::uint64_t>(history[i]);
        }
        auto it = rows_.find(state);
        if (it != rows_.end())
        {
            return it->second;
        }
        // Successor sets depend only on (seed, state), not on visiting order.
        std::mt19937_64 local(spec_.seed * 0x9E3779B97F4A7C15ull + state);
        std::vector<TokenId> all(spec_.vocab);
        std::iota(all.begin(), all.end(), TokenId{0});
        std::shuffle(all.begin(), all.end(), local);
        Row row;
        std::size_t const fan = std::min(spec_.branching, spec_.vocab);
        row.tokens.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(fan));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t i = 0; i < fan; ++i)
        {
            row.weights.push_back(std::exp(spec_.skew * gauss(local)));
        }
        return rows_.emplace(state, std::move(row)).first->second;
    }

    CopyCorpusSpec spec_;
    std::unordered_map<std::uint64_t, Row> rows_;
};

} // namespace

SyntheticSetup make_copy_corpus(CopyCorpusSpec const& spec)
{
    SyntheticSetup out;
    out.vocab_size = spec.vocab + 1;
    MarkovLanguage lang(spec);
    std::mt19937_64 rng(spec.seed);
    out.training_stream = lang.walk(spec.train_tokens, rng);
    out.corpus.reserve(spec.items);
    for (std::size_t i = 0; i < spec.items; ++i)
    {
        CorpusItem item;
        item.id = "copy-" + std::to_string(i);
        auto reference = lang.walk(spec.reference_len, rng);
        item.prompt = lang.walk(spec.distractor_len, rng);
        item.prompt.insert(item.prompt.end(), reference.begin(), reference.end());
        std::size_t const cue = std::min(spec.cue_len, reference.size());
        item.prompt.insert(item.prompt.end(), reference.begin(), reference.begin() + static_cast<std::ptrdiff_t>(cue));
        // The cue is already in the prompt; the reference is what should follow it.
        item.reference = std::vector<TokenId>(reference.begin() + static_cast<std::ptrdiff_t>(cue), reference.end());
        out.corpus.push_back(std::move(item));
    }
    return out;
}

std::vector<CorpusItem> make_random_prompts(
    std::size_t count, std::size_t min_len, std::size_t max_len, std::size_t vocab, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(vocab) - 1);
    std::vector<CorpusItem> items;
    for (std::size_t i = 0; i < count; ++i)
    {
        CorpusItem item;
        item.id = "rand-" + std::to_string(i);
        item.prompt.resize(len(rng));
        for (auto& t : item.prompt)
        {
            t = tok(rng);
        }
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace ctxspec
