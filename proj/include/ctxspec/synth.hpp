// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctxspec/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ctxspec
{

/// High-overlap copy corpus over a random Markov "language".
///
/// Each state (the previous `chain_order` tokens) has `branching` successors with skewed
/// weights. The training stream is one long walk; every item's reference is a fresh walk, and
/// its prompt is a distractor walk, then the reference verbatim, then the first `cue_len`
/// reference tokens again.
struct CopyCorpusSpec
{
    std::size_t vocab = 24; // content tokens; the model vocabulary adds one EOS id
    std::size_t chain_order = 3;
    std::size_t branching = 2;
    double skew = 0.5; // log-weight spread between successors
    std::size_t train_tokens = 1000000;
    std::size_t items = 200;
    std::size_t reference_len = 96;
    std::size_t distractor_len = 32;
    std::size_t cue_len = 4;
    std::uint64_t seed = 1;
};

struct SyntheticSetup
{
    std::vector<TokenId> training_stream;
    std::vector<CorpusItem> corpus;
    std::size_t vocab_size = 0; // content tokens + EOS
};

SyntheticSetup make_copy_corpus(CopyCorpusSpec const& spec);

// Uniformly random prompts (no planted overlap).
std::vector<CorpusItem> make_random_prompts(
    std::size_t count, std::size_t min_len, std::size_t max_len, std::size_t vocab, std::uint64_t seed);

} // namespace ctxspec
