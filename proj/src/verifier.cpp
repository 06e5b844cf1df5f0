// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/verifier.hpp"

#include "ctxspec/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace ctxspec
{

double entropy(Distribution const& d)
{
    return kernels::entropy(d.probs);
}

double adaptive_threshold(Distribution const& d, double alpha, double beta)
{
    return std::min(alpha * entropy(d) + beta, argmax(d).prob);
}

NodeVerdict verify_node(TokenId token, Origin origin, Distribution const& d, VerifyParams const& params)
{
    NodeVerdict v;
    v.prob = d.prob_of(token);
    auto strict_match = [&] { return argmax(d).token == token; };

    switch (params.mode.kind)
    {
    case VerificationMode::Kind::Strict: v.accepted = strict_match(); break;
    case VerificationMode::Kind::FixedThreshold:
        v.threshold = params.mode.threshold;
        v.accepted = v.prob >= params.mode.threshold;
        break;
    case VerificationMode::Kind::TopK:
    {
        auto const rank = rank_of(d, token);
        v.accepted = rank && *rank <= params.mode.k;
        break;
    }
    case VerificationMode::Kind::Adaptive:
        if (origin == Origin::GeneratedContext)
        {
            v.strict_routed = true;
            v.accepted = strict_match();
            break;
        }
        v.entropy = entropy(d);
        v.threshold = adaptive_threshold(d, params.alpha, params.beta);
        v.accepted = v.prob >= *v.threshold;
        break;
    }
    return v;
}

VerifyOutcome select_longest(
    DraftTree const& tree, std::vector<NodeVerdict> verdicts, std::span<Distribution const> node_dists)
{
    auto const& nodes = tree.nodes();
    std::vector<char> reachable(nodes.size(), 0);
    reachable[0] = 1;
    std::size_t best = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
    {
        auto const parent = static_cast<std::size_t>(nodes[i].parent);
        // A rejected node cuts off its whole subtree.
        reachable[i] = reachable[parent] && verdicts[i].accepted ? 1 : 0;
        if (reachable[i] && nodes[i].depth > nodes[best].depth)
        {
            best = i;
        }
    }
    VerifyOutcome out;
    out.verdicts = std::move(verdicts);
    out.accepted_path = tree.path_to(best);
    out.bonus = argmax(node_dists[best]).token;
    return out;
}

VerifyOutcome verify_tree(DraftTree const& tree, std::span<Distribution const> node_dists, VerifyParams const& params)
{
    auto const& nodes = tree.nodes();
    std::vector<NodeVerdict> verdicts(nodes.size());
    verdicts[0].accepted = true;
    verdicts[0].prob = 1.0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
    {
        auto const parent = static_cast<std::size_t>(nodes[i].parent);
        verdicts[i] = verify_node(nodes[i].token, nodes[i].origin, node_dists[parent], params);
    }
    return select_longest(tree, std::move(verdicts), node_dists);
}

} // namespace ctxspec
