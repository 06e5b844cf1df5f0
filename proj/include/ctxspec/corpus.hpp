// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/core.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctxspec
{

struct CorpusItem
{
    std::string id;
    std::vector<TokenId> prompt;
    std::optional<std::vector<TokenId>> reference;
};

/// JSON Lines, one item per line:
///   {"id": "q1", "prompt": [3, 4, 5] | "raw text", "reference": [..] | "raw text"}
/// Raw text is tokenized byte-level. Blank lines are skipped. Throws BadCorpus on malformed
/// lines, duplicate ids or an empty corpus.
std::vector<CorpusItem> parse_corpus(std::string_view text);
std::vector<CorpusItem> load_corpus(std::filesystem::path const& path);

// Token-list form of parse_corpus's input.
std::string format_corpus(std::vector<CorpusItem> const& items);

} // namespace ctxspec
