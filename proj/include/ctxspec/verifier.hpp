// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/core.hpp"
#include "ctxspec/drafter.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ctxspec
{

// Shannon entropy in nats; zero-probability entries contribute nothing.
double entropy(Distribution const& d);

// min(alpha * H(d) + beta, max_t d(t)). The cap keeps the argmax token acceptable.
double adaptive_threshold(Distribution const& d, double alpha, double beta);

struct VerifyParams
{
    VerificationMode mode = VerificationMode::adaptive();
    double alpha = 0.1;
    double beta = 0.1;

    static VerifyParams from(EngineConfig const& cfg)
    {
        return {cfg.mode, cfg.alpha, cfg.beta};
    }
};

struct NodeVerdict
{
    bool accepted = false;
    double prob = 0.0;                // p(token | ancestors + prefix)
    std::optional<double> threshold;  // only for threshold-based decisions
    std::optional<double> entropy;    // only in adaptive mode
    bool strict_routed = false;       // adaptive mode fell back to argmax matching
};

// d is the full verification distribution produced at the node's parent.
NodeVerdict verify_node(TokenId token, Origin origin, Distribution const& d, VerifyParams const& params);

struct VerifyOutcome
{
    std::vector<NodeVerdict> verdicts;     // per tree node; the root is always accepted
    std::vector<std::size_t> accepted_path; // node indices, root excluded
    TokenId bonus = 0;

    std::size_t accepted_count() const noexcept
    {
        return accepted_path.size();
    }
};

// Longest root-anchored path whose nodes all passed. Equal lengths go to the leaf inserted
// first. The bonus token is the argmax at the end of that path.
VerifyOutcome select_longest(
    DraftTree const& tree, std::vector<NodeVerdict> verdicts, std::span<Distribution const> node_dists);

// dists[i] is the distribution the model produced at node i (conditioned on the prefix and
// the path through i).
VerifyOutcome verify_tree(DraftTree const& tree, std::span<Distribution const> node_dists, VerifyParams const& params);

} // namespace ctxspec
