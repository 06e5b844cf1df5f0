// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/core.hpp"
#include "ctxspec/draft_pool.hpp"
#include "ctxspec/drafter.hpp"
#include "ctxspec/models.hpp"
#include "ctxspec/verifier.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace ctxspec
{

struct NodeRecord
{
    TokenId token = 0;
    Origin origin = Origin::InputContext;
    std::size_t depth = 0;
    double prob = 0.0;
    std::optional<double> threshold;
    bool passed = false;    // individual verdict
    bool committed = false; // on the emitted path
    // Input-context tokens only: whether the copied token was the cached top-1 at its source.
    std::optional<bool> aligned;
};

struct StepRecord
{
    std::size_t drafted = 0;  // tree nodes excluding the root
    std::size_t accepted = 0; // draft tokens committed
    std::optional<TokenId> bonus; // absent only when the accepted path ended in EOS
    std::size_t tree_depth = 0;
    std::vector<NodeRecord> nodes;
    double wall_ms = 0.0;

    std::size_t emitted() const noexcept
    {
        return accepted + (bonus ? 1 : 0);
    }
};

/// One generation request: sequence, draft pool and alignment cache over a shared model.
///
/// A session is single-threaded. Each step makes exactly one forward_tree call.
class Session
{
public:
    Session(LanguageModel const& model, EngineConfig config, std::vector<TokenId> prompt);

    // Runs once; step() calls it if needed.
    void prefill();
    StepRecord step();
    bool finished() const noexcept;

    struct Result
    {
        TokenSeq sequence;
        std::vector<StepRecord> steps;
    };
    // Steps until EOS or max_new_tokens.
    Result generate();

    TokenSeq const& sequence() const noexcept
    {
        return seq_;
    }
    DraftPool const& pool() const
    {
        return *pool_;
    }
    AlignmentCache const& cache() const noexcept
    {
        return cache_;
    }
    std::size_t generated_count() const noexcept
    {
        return seq_.size() - seq_.prompt_len;
    }
    TokenId eos() const noexcept
    {
        return eos_;
    }
    EngineConfig const& config() const noexcept
    {
        return config_;
    }

private:
    LanguageModel const& model_;
    EngineConfig config_;
    TokenId eos_;
    TokenSeq seq_;
    std::optional<DraftPool> pool_;
    AlignmentCache cache_;
    bool prefilled_ = false;
    bool hit_eos_ = false;
    std::vector<StepRecord> records_;
};

struct OriginRate
{
    std::size_t drafted = 0;
    std::size_t accepted = 0;

    // nullopt when nothing of this class was drafted.
    std::optional<double> rate() const
    {
        if (drafted == 0)
        {
            return std::nullopt;
        }
        return static_cast<double>(accepted) / static_cast<double>(drafted);
    }
};

struct Metrics
{
    std::size_t steps = 0;
    std::size_t tokens = 0;
    double mal = 0.0;
    OriginRate input;
    OriginRate generated;
    OriginRate sampled;
    OriginRate aligned;
    OriginRate misaligned;
    double wall_ms = 0.0;

    std::optional<double> tokens_per_second() const
    {
        if (wall_ms <= 0.0)
        {
            return std::nullopt;
        }
        return static_cast<double>(tokens) * 1000.0 / wall_ms;
    }
};

// Throws EmptyRecords.
Metrics metrics(std::vector<StepRecord> const& records);

} // namespace ctxspec
