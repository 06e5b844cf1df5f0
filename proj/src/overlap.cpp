// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/overlap.hpp"

#include <algorithm>
#include <vector>

namespace ctxspec
{

std::size_t lcs_length(std::span<TokenId const> a, std::span<TokenId const> b)
{
    // Rolling single row over b.
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i)
    {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j)
        {
            std::size_t const up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

std::size_t longest_common_substring(std::span<TokenId const> a, std::span<TokenId const> b)
{
    std::vector<std::size_t> row(b.size() + 1, 0);
    std::size_t best = 0;
    for (std::size_t i = 1; i <= a.size(); ++i)
    {
        for (std::size_t j = b.size(); j >= 1; --j)
        {
            row[j] = a[i - 1] == b[j - 1] ? row[j - 1] + 1 : 0;
            best = std::max(best, row[j]);
        }
    }
    return best;
}

double overlap_ratio(std::span<TokenId const> context, std::span<TokenId const> reference, OverlapKind kind)
{
    if (reference.empty())
    {
        throw Error(ErrorCode::MissingReference, "overlap ratio needs a non-empty reference");
    }
    std::size_t const common = kind == OverlapKind::Subsequence ? lcs_length(context, reference)
                                                                : longest_common_substring(context, reference);
    return static_cast<double>(common) / static_cast<double>(reference.size());
}

} // namespace ctxspec
