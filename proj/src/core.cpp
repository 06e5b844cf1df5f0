// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/core.hpp"

#include "ctxspec/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace ctxspec
{

namespace
{
constexpr double kNormTolerance = 1e-9;

bool is_identity_support(Distribution const& d)
{
    for (std::size_t i = 0; i < d.support.size(); ++i)
    {
        if (d.support[i] != static_cast<TokenId>(i))
        {
            return false;
        }
    }
    return true;
}
} // namespace

std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::NonNormalized: return "NonNormalized";
    case ErrorCode::NegativeProb: return "NegativeProb";
    case ErrorCode::DuplicateSupport: return "DuplicateSupport";
    case ErrorCode::UnsortedTruncation: return "UnsortedTruncation";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::PrefixMutated: return "PrefixMutated";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    case ErrorCode::BadCorpus: return "BadCorpus";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::InvalidToken: return "InvalidToken";
    }
    return "Unknown";
}

void validate_sequence(TokenSeq const& seq, std::size_t vocab_size)
{
    if (seq.prompt_len > seq.tokens.size())
    {
        throw Error(ErrorCode::InvalidToken, "prompt_len exceeds sequence length");
    }
    for (TokenId t : seq.tokens)
    {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab_size)
        {
            throw Error(ErrorCode::InvalidToken, "token id " + std::to_string(t) + " outside vocabulary");
        }
    }
}

Distribution Distribution::full(std::vector<double> probs)
{
    Distribution d;
    d.support.resize(probs.size());
    std::iota(d.support.begin(), d.support.end(), TokenId{0});
    d.probs = std::move(probs);
    d.kind = DistKind::Full;
    return d;
}

Distribution Distribution::uniform(std::size_t vocab_size)
{
    return full(std::vector<double>(vocab_size, 1.0 / static_cast<double>(vocab_size)));
}

Distribution Distribution::one_hot(std::size_t vocab_size, TokenId token)
{
    std::vector<double> probs(vocab_size, 0.0);
    probs.at(static_cast<std::size_t>(token)) = 1.0;
    return full(std::move(probs));
}

double Distribution::prob_of(TokenId token) const
{
    if (kind == DistKind::Full && token >= 0 && static_cast<std::size_t>(token) < support.size()
        && support[static_cast<std::size_t>(token)] == token)
    {
        return probs[static_cast<std::size_t>(token)];
    }
    auto it = std::find(support.begin(), support.end(), token);
    return it == support.end() ? 0.0 : probs[static_cast<std::size_t>(it - support.begin())];
}

std::optional<ErrorCode> validate_distribution(Distribution const& d)
{
    if (d.support.size() != d.probs.size() || d.probs.empty())
    {
        return ErrorCode::NonNormalized;
    }
    for (double p : d.probs)
    {
        if (std::isnan(p))
        {
            return ErrorCode::NonNormalized;
        }
        if (p < 0.0)
        {
            return ErrorCode::NegativeProb;
        }
    }
    if (!(d.kind == DistKind::Full && is_identity_support(d)))
    {
        std::unordered_set<TokenId> seen;
        seen.reserve(d.support.size());
        for (TokenId t : d.support)
        {
            if (!seen.insert(t).second)
            {
                return ErrorCode::DuplicateSupport;
            }
        }
    }
    double const total = kernels::sum(d.probs);
    if (d.kind == DistKind::Full)
    {
        if (std::abs(total - 1.0) > kNormTolerance)
        {
            return ErrorCode::NonNormalized;
        }
    }
    else
    {
        if (total > 1.0 + kNormTolerance)
        {
            return ErrorCode::NonNormalized;
        }
        for (std::size_t i = 1; i < d.probs.size(); ++i)
        {
            if (d.probs[i] > d.probs[i - 1])
            {
                return ErrorCode::UnsortedTruncation;
            }
        }
    }
    return std::nullopt;
}

Distribution truncate_topk(Distribution const& d, std::size_t k)
{
    std::vector<std::size_t> order(d.probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t const keep = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
        [&](std::size_t a, std::size_t b)
        {
            if (d.probs[a] != d.probs[b])
            {
                return d.probs[a] > d.probs[b];
            }
            return d.support[a] < d.support[b];
        });
    Distribution out;
    out.kind = DistKind::TruncatedTopK;
    out.support.reserve(keep);
    out.probs.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
    {
        out.support.push_back(d.support[order[i]]);
        out.probs.push_back(d.probs[order[i]]);
    }
    return out;
}

ArgMax argmax(Distribution const& d)
{
    if (d.probs.empty())
    {
        throw Error(ErrorCode::NonNormalized, "argmax of an empty distribution");
    }
    if (d.kind == DistKind::Full)
    {
        auto const m = kernels::max_first(d.probs);
        // Full supports are id-ordered, so the first maximum is the lowest id.
        return {d.support[m.index], m.value};
    }
    ArgMax best{d.support[0], d.probs[0]};
    for (std::size_t i = 1; i < d.probs.size(); ++i)
    {
        if (d.probs[i] > best.prob || (d.probs[i] == best.prob && d.support[i] < best.token))
        {
            best = {d.support[i], d.probs[i]};
        }
    }
    return best;
}

std::optional<std::size_t> rank_of(Distribution const& d, TokenId token)
{
    if (d.kind == DistKind::Full && token >= 0 && static_cast<std::size_t>(token) < d.support.size()
        && d.support[static_cast<std::size_t>(token)] == token)
    {
        auto const idx = static_cast<std::size_t>(token);
        return 1 + kernels::count_ranked_before(d.probs, d.probs[idx], idx);
    }
    auto it = std::find(d.support.begin(), d.support.end(), token);
    if (it == d.support.end())
    {
        return std::nullopt;
    }
    double const p = d.probs[static_cast<std::size_t>(it - d.support.begin())];
    std::size_t before = 0;
    for (std::size_t i = 0; i < d.probs.size(); ++i)
    {
        if (d.probs[i] > p || (d.probs[i] == p && d.support[i] < token))
        {
            ++before;
        }
    }
    return before + 1;
}

VerificationMode VerificationMode::parse(std::string_view text)
{
    auto bad = [&] { return Error(ErrorCode::BadConfig, "unrecognised verification mode '" + std::string(text) + "'"); };
    if (text == "strict")
    {
        return strict();
    }
    if (text == "adaptive")
    {
        return adaptive();
    }
    auto const colon = text.find(':');
    if (colon == std::string_view::npos)
    {
        throw bad();
    }
    auto const head = text.substr(0, colon);
    auto const arg = std::string(text.substr(colon + 1));
    if (head == "fixed")
    {
        std::size_t used = 0;
        double delta = 0.0;
        try
        {
            delta = std::stod(arg, &used);
        }
        catch (std::exception const&)
        {
            throw bad();
        }
        if (used != arg.size() || !(delta >= 0.0))
        {
            throw bad();
        }
        return fixed(delta);
    }
    if (head == "topk")
    {
        std::size_t k = 0;
        auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
        if (ec != std::errc{} || ptr != arg.data() + arg.size() || k == 0)
        {
            throw bad();
        }
        return top_k(k);
    }
    throw bad();
}

std::string VerificationMode::to_string() const
{
    switch (kind)
    {
    case Kind::Strict: return "strict";
    case Kind::Adaptive: return "adaptive";
    case Kind::TopK: return "topk:" + std::to_string(k);
    case Kind::FixedThreshold:
    {
        std::ostringstream os;
        os << "fixed:" << threshold;
        return os.str();
    }
    }
    return "unknown";
}

void EngineConfig::validate() const
{
    auto fail = [](std::string const& msg) { throw Error(ErrorCode::BadConfig, msg); };
    if (ngram_len == 0)
    {
        fail("ngram_len must be positive");
    }
    if (max_key_len == 0)
    {
        fail("max_key_len must be positive");
    }
    if (min_key_len == 0 || min_key_len > max_key_len)
    {
        fail("min_key_len must lie in [1, max_key_len]");
    }
    if (cache_topk == 0)
    {
        fail("cache_topk must be positive");
    }
    if (!(alpha >= 0.0))
    {
        fail("alpha must be >= 0");
    }
    if (!(beta >= 0.0 && beta <= 1.0))
    {
        fail("beta must lie in [0, 1]");
    }
    if (mode.kind == VerificationMode::Kind::TopK && mode.k == 0)
    {
        fail("top-k verification needs k >= 1");
    }
    if (mode.kind == VerificationMode::Kind::FixedThreshold && !(mode.threshold >= 0.0))
    {
        fail("fixed threshold must be >= 0");
    }
    if (eos && *eos < 0)
    {
        fail("eos must be a valid token id");
    }
}

} // namespace ctxspec
