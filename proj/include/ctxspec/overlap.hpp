// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/core.hpp"

#include <cstddef>
#include <span>

namespace ctxspec
{

enum class OverlapKind
{
    Subsequence, // longest common subsequence
    Substring,   // longest common contiguous run
};

std::size_t lcs_length(std::span<TokenId const> a, std::span<TokenId const> b);
std::size_t longest_common_substring(std::span<TokenId const> a, std::span<TokenId const> b);

// Overlap of `context` with `reference`, normalised by the reference length.
// Throws MissingReference for an empty reference.
double overlap_ratio(
    std::span<TokenId const> context, std::span<TokenId const> reference, OverlapKind kind = OverlapKind::Subsequence);

} // namespace ctxspec
