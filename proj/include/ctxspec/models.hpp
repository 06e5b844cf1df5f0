// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/core.hpp"
#include "ctxspec/drafter.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctxspec
{

/// Target model contract.
///
/// Implementations provide next(): the full next-token distribution given a context. prefill()
/// and forward_tree() are the batched entry points the engine calls; both are derived from
/// next() by default, forward_tree reading each node's context off its mask row.
class LanguageModel
{
public:
    virtual ~LanguageModel() = default;

    virtual std::size_t vocab_size() const = 0;
    virtual Distribution next(std::span<TokenId const> context) const = 0;

    // Element i is p(. | seq[0 .. i]), for i in [0, seq.size()).
    virtual std::vector<Distribution> prefill(std::span<TokenId const> seq) const;

    // committed.back() must equal the root token. Element i is conditioned on committed plus
    // the non-root nodes that row i of the mask attends to, in linearized order.
    virtual std::vector<Distribution> forward_tree(
        std::span<TokenId const> committed, DraftTree const& tree, TreeMask const& mask) const;

    TokenId default_eos() const
    {
        return static_cast<TokenId>(vocab_size()) - 1;
    }
};

// Forwards to another model and counts batched calls.
class CountingModel final : public LanguageModel
{
public:
    explicit CountingModel(LanguageModel const& inner)
        : inner_(inner)
    {
    }

    std::size_t vocab_size() const override
    {
        return inner_.vocab_size();
    }
    Distribution next(std::span<TokenId const> context) const override
    {
        return inner_.next(context);
    }
    std::vector<Distribution> prefill(std::span<TokenId const> seq) const override;
    std::vector<Distribution> forward_tree(
        std::span<TokenId const> committed, DraftTree const& tree, TreeMask const& mask) const override;

    std::size_t prefill_calls() const noexcept
    {
        return prefill_calls_.load();
    }
    std::size_t forward_calls() const noexcept
    {
        return forward_calls_.load();
    }

private:
    LanguageModel const& inner_;
    mutable std::atomic<std::size_t> prefill_calls_{0};
    mutable std::atomic<std::size_t> forward_calls_{0};
};

/// Explicit lookup table from the last `window` tokens to a distribution, uniform otherwise.
/// Contexts shorter than the window are looked up whole.
class TableModel final : public LanguageModel
{
public:
    TableModel(std::size_t vocab_size, std::size_t window);

    // Validates the row; throws with the validation error code.
    void set_row(std::vector<TokenId> context, Distribution dist);

    std::size_t vocab_size() const override
    {
        return vocab_;
    }
    std::size_t window() const noexcept
    {
        return window_;
    }
    std::size_t row_count() const noexcept
    {
        return rows_.size();
    }
    Distribution next(std::span<TokenId const> context) const override;

    /// JSON table spec:
    ///   {"vocab_size": V, "window": m,
    ///    "rows": [{"context": [..], "probs": [V values]},
    ///             {"context": [..], "peaks": [[token, p], ..]}]}
    /// "peaks" places the listed mass and spreads the rest evenly over the other tokens.
    static TableModel from_json_text(std::string const& text);
    static TableModel load(std::filesystem::path const& path);

    // Every context of exactly `window` tokens gets a dense random row; exp(sharpness * N(0,1))
    // weights give a continuous distribution, so rows are tie-free with probability one.
    static TableModel random(std::size_t vocab_size, std::size_t window, std::uint64_t seed, double sharpness);

private:
    std::size_t vocab_;
    std::size_t window_;
    std::map<std::vector<TokenId>, Distribution> rows_;
};

/// Add-k smoothed n-gram model with fixed-order backoff for short contexts:
///   P(t | ctx) = (count(ctx, t) + k) / (count(ctx) + k * V)
/// using the last order-1 tokens of the context (fewer when the context is shorter).
/// An unseen context with k = 0 is uniform.
class NGramLM final : public LanguageModel
{
public:
    NGramLM() = default;

    // Throws UntrainedModel on an empty stream, InvalidToken on ids outside the vocabulary.
    static NGramLM train(std::span<TokenId const> stream, std::size_t order, double smoothing, std::size_t vocab_size);

    bool trained() const noexcept
    {
        return order_ > 0;
    }
    std::size_t order() const noexcept
    {
        return order_;
    }
    double smoothing() const noexcept
    {
        return smoothing_;
    }
    std::size_t vocab_size() const override
    {
        return vocab_;
    }

    // Throws UntrainedModel.
    double ngram_prob(std::span<TokenId const> context, TokenId token) const;
    Distribution next(std::span<TokenId const> context) const override;

private:
    using Key = std::vector<TokenId>;
    struct KeyHash
    {
        std::size_t operator()(Key const& key) const noexcept;
    };
    struct Row
    {
        std::uint64_t total = 0;
        std::unordered_map<TokenId, std::uint32_t> counts;
    };

    Row const* find_row(std::span<TokenId const> context) const;

    std::size_t order_ = 0;
    double smoothing_ = 1.0;
    std::size_t vocab_ = 0;
    // tables_[c] holds contexts of length c.
    std::vector<std::unordered_map<Key, Row, KeyHash>> tables_;
};

// Autoregressive reference: append argmax of p(. | seq) until max_new tokens or eos.
TokenSeq greedy_decode(LanguageModel const& model, TokenSeq seq, std::size_t max_new, TokenId eos);

// Whitespace-separated non-negative integers.
std::vector<TokenId> read_token_stream(std::filesystem::path const& path);
// Every byte is a token in [0, 256).
std::vector<TokenId> tokenize_bytes(std::string_view text);
std::vector<TokenId> read_byte_stream(std::filesystem::path const& path);

/// Resolves a model spec: "table:<file>", "ngram:<file>,<order>,<k>[,<vocab>]" (integer token
/// stream) or "ngram-text:<file>,<order>,<k>" (raw text, byte tokens, vocab 256).
std::unique_ptr<LanguageModel> load_model(std::string const& spec);

} // namespace ctxspec
