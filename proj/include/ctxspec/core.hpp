// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctxspec
{

using TokenId = std::int32_t;

enum class ErrorCode
{
    NonNormalized,
    NegativeProb,
    DuplicateSupport,
    UnsortedTruncation,
    EmptySequence,
    PrefixMutated,
    UntrainedModel,
    EmptyRecords,
    BadCorpus,
    BadConfig,
    MissingReference,
    InvalidToken,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, std::string const& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return code_;
    }

private:
    ErrorCode code_;
};

// Prompt tokens occupy [0, prompt_len); everything after was generated.
struct TokenSeq
{
    std::vector<TokenId> tokens;
    std::size_t prompt_len = 0;

    std::size_t size() const noexcept
    {
        return tokens.size();
    }
    bool empty() const noexcept
    {
        return tokens.empty();
    }
    std::span<TokenId const> view() const noexcept
    {
        return tokens;
    }
    std::span<TokenId const> generated() const noexcept
    {
        return std::span<TokenId const>(tokens).subspan(prompt_len);
    }

    bool operator==(TokenSeq const&) const = default;
};

// Throws InvalidToken if prompt_len is out of range or a token id falls outside [0, vocab_size).
void validate_sequence(TokenSeq const& seq, std::size_t vocab_size);

enum class DistKind
{
    Full,
    TruncatedTopK,
};

/// Probability vector over a finite vocabulary.
///
/// A full distribution has support == 0..V-1 in order. A truncated one keeps the K most
/// probable tokens sorted by probability (descending), ties by lowest token id.
struct Distribution
{
    std::vector<TokenId> support;
    std::vector<double> probs;
    DistKind kind = DistKind::Full;

    static Distribution full(std::vector<double> probs);
    static Distribution uniform(std::size_t vocab_size);
    static Distribution one_hot(std::size_t vocab_size, TokenId token);

    std::size_t size() const noexcept
    {
        return probs.size();
    }

    // 0 when the token is not in the support.
    double prob_of(TokenId token) const;

    bool operator==(Distribution const&) const = default;
};

// Ok is std::nullopt.
std::optional<ErrorCode> validate_distribution(Distribution const& d);

// Top-K by probability, ties to the lowest id. K larger than the support keeps everything.
Distribution truncate_topk(Distribution const& d, std::size_t k);

struct ArgMax
{
    TokenId token = 0;
    double prob = 0.0;
};

// Ties break toward the lowest token id.
ArgMax argmax(Distribution const& d);

// 1-based rank of token (strictly-greater probs, plus equal probs with lower id, come first).
// std::nullopt when the token is not in the support.
std::optional<std::size_t> rank_of(Distribution const& d, TokenId token);

struct VerificationMode
{
    enum class Kind
    {
        Strict,
        FixedThreshold,
        TopK,
        Adaptive,
    };

    Kind kind = Kind::Adaptive;
    double threshold = 0.1; // FixedThreshold only
    std::size_t k = 5;      // TopK only

    static VerificationMode strict()
    {
        return {Kind::Strict, 0.0, 0};
    }
    static VerificationMode fixed(double delta)
    {
        return {Kind::FixedThreshold, delta, 0};
    }
    static VerificationMode top_k(std::size_t k)
    {
        return {Kind::TopK, 0.0, k};
    }
    static VerificationMode adaptive()
    {
        return {Kind::Adaptive, 0.0, 0};
    }

    // "strict", "fixed:<delta>", "topk:<k>", "adaptive".
    static VerificationMode parse(std::string_view text);
    std::string to_string() const;

    bool operator==(VerificationMode const&) const = default;
};

struct EngineConfig
{
    std::size_t ngram_len = 6;
    std::size_t max_key_len = 6;
    std::size_t min_key_len = 1;
    std::size_t max_expansion = 2;
    std::size_t cache_topk = 8;
    double alpha = 0.1;
    double beta = 0.1;
    VerificationMode mode = VerificationMode::adaptive();
    bool alignment_sampling = true;
    std::size_t max_candidates = 4;
    std::size_t max_new_tokens = 256;
    std::optional<TokenId> eos; // unset: vocab_size - 1
    std::uint64_t seed = 0;

    // Throws BadConfig.
    void validate() const;
};

} // namespace ctxspec
