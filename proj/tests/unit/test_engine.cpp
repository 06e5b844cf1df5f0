// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/engine.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ctxspec;

namespace
{

std::vector<TokenId> as_vec(std::span<TokenId const> s)
{
    return {s.begin(), s.end()};
}

// next(t) = one_hot(successor[t]); vocabulary 12, EOS 11.
TableModel successor_model(std::vector<std::pair<TokenId, TokenId>> const& edges, TokenId fallback = 10)
{
    TableModel model(12, 1);
    for (TokenId t = 0; t < 12; ++t)
    {
        model.set_row({t}, Distribution::one_hot(12, fallback));
    }
    for (auto [from, to] : edges)
    {
        model.set_row({from}, Distribution::one_hot(12, to));
    }
    return model;
}

std::vector<TokenId> random_prompt(std::mt19937_64& rng, std::size_t vocab, std::size_t len)
{
    std::vector<TokenId> p(len);
    for (auto& t : p)
    {
        t = static_cast<TokenId>(rng() % vocab);
    }
    return p;
}

StepRecord accepted(std::size_t n)
{
    StepRecord r;
    r.accepted = n;
    r.bonus = 0;
    return r;
}

} // namespace

TEST(Session, NoRetrievalHitEmitsOneToken)
{
    auto model = successor_model({{3, 4}});
    EngineConfig cfg;
    cfg.eos = 11;
    Session s(model, cfg, {1, 2, 3});
    auto rec = s.step();
    EXPECT_EQ(rec.drafted, 0u);
    EXPECT_EQ(rec.emitted(), 1u);
    EXPECT_EQ(s.sequence().tokens.back(), 4);
}

TEST(Session, AgreeingModelAcceptsTheWholeCandidate)
{
    // Prompt 9 1 2 3 4 5 6 7 8 9: the trailing 9 retrieves 1..6 and the model agrees.
    auto model = successor_model({{9, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}});
    for (auto mode : {VerificationMode::strict(), VerificationMode::adaptive()})
    {
        EngineConfig cfg;
        cfg.mode = mode;
        cfg.eos = 11;
        Session s(model, cfg, {9, 1, 2, 3, 4, 5, 6, 7, 8, 9});
        auto rec = s.step();
        EXPECT_EQ(rec.accepted, 6u);
        EXPECT_EQ(rec.emitted(), 7u);
        EXPECT_EQ(as_vec(s.sequence().generated()), (std::vector<TokenId>{1, 2, 3, 4, 5, 6, 7}));
    }
}

TEST(Session, OneForwardPassPerStep)
{
    auto inner = TableModel::random(6, 2, 3, 1.0);
    CountingModel model(inner);
    EngineConfig cfg;
    cfg.max_new_tokens = 40;
    Session s(model, cfg, {0, 1, 2, 0, 1, 2, 0, 1});
    auto result = s.generate();
    EXPECT_EQ(model.prefill_calls(), 1u);
    EXPECT_EQ(model.forward_calls(), result.steps.size());
}

TEST(Session, EosBonusStopsGeneration)
{
    auto model = successor_model({{2, 11}});
    EngineConfig cfg;
    Session s(model, cfg, {1, 2});
    EXPECT_EQ(s.eos(), 11);
    auto result = s.generate();
    EXPECT_EQ(result.steps.size(), 1u);
    EXPECT_EQ(as_vec(result.sequence.generated()), (std::vector<TokenId>{11}));
    EXPECT_TRUE(s.finished());
}

TEST(Session, EosInsideTheAcceptedPathEndsTheOutput)
{
    // Prompt 3 11 5 3: the trailing 3 retrieves 11 5 3, the model predicts 11 after 3.
    auto model = successor_model({{3, 11}, {11, 5}, {5, 3}});
    EngineConfig cfg;
    cfg.mode = VerificationMode::strict();
    Session s(model, cfg, {3, 11, 5, 3});
    auto result = s.generate();
    ASSERT_EQ(result.steps.size(), 1u);
    EXPECT_EQ(result.steps[0].accepted, 1u);
    EXPECT_FALSE(result.steps[0].bonus.has_value());
    EXPECT_EQ(as_vec(result.sequence.generated()), (std::vector<TokenId>{11}));
}

TEST(Session, SingleTokenBudget)
{
    auto model = successor_model({{9, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}});
    EngineConfig cfg;
    cfg.max_new_tokens = 1;
    cfg.eos = 11;
    Session s(model, cfg, {9, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    auto result = s.generate();
    EXPECT_EQ(result.steps.size(), 1u);
    EXPECT_EQ(as_vec(result.sequence.generated()), (std::vector<TokenId>{1}));
}

TEST(Session, BudgetClipsTheAcceptedPath)
{
    auto model = successor_model({{9, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}});
    EngineConfig cfg;
    cfg.max_new_tokens = 4;
    cfg.eos = 11;
    Session s(model, cfg, {9, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    auto result = s.generate();
    EXPECT_EQ(result.steps.size(), 1u);
    EXPECT_EQ(as_vec(result.sequence.generated()), (std::vector<TokenId>{1, 2, 3, 4}));
}

TEST(Session, RejectsBadInput)
{
    TableModel model(4, 1);
    EXPECT_THROW(Session(model, EngineConfig{}, {}), Error);
    EXPECT_THROW(Session(model, EngineConfig{}, {7}), Error);
    EngineConfig cfg;
    cfg.eos = 4;
    EXPECT_THROW(Session(model, cfg, {1}), Error);
}

TEST(Session, CacheHoldsOnlyCommittedPositions)
{
    auto model = TableModel::random(5, 2, 21, 1.0);
    EngineConfig cfg;
    cfg.max_new_tokens = 30;
    Session s(model, cfg, {0, 1, 2, 0, 1, 2, 0});
    s.generate();
    EXPECT_EQ(s.cache().extent(), s.sequence().size());
    // The bonus token's own distribution arrives with the next pass.
    EXPECT_EQ(s.cache().find(s.sequence().size()), nullptr);
    for (std::size_t len = 1; len < s.sequence().size(); ++len)
    {
        auto const* d = s.cache().find(len);
        ASSERT_NE(d, nullptr) << len;
        auto const want = truncate_topk(model.next(std::span<TokenId const>(s.sequence().tokens).first(len)), 8);
        ASSERT_EQ(d->support, want.support);
    }
}

// Strict mode reproduces greedy decoding token for token.
TEST(SessionProperty, StrictEqualsGreedy)
{
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 60; ++trial)
    {
        std::size_t const vocab = 3 + rng() % 6;
        auto model = TableModel::random(vocab, 1 + rng() % 2, rng(), 0.5 + (rng() % 4));
        EngineConfig cfg;
        cfg.mode = VerificationMode::strict();
        cfg.max_new_tokens = 1 + rng() % 60;
        cfg.alignment_sampling = trial % 2 == 0;
        auto prompt = random_prompt(rng, vocab - 1, 1 + rng() % 30);
        Session s(model, cfg, prompt);
        auto result = s.generate();
        auto const want = greedy_decode(model, TokenSeq{prompt, prompt.size()}, cfg.max_new_tokens, s.eos());
        ASSERT_EQ(result.sequence.tokens, want.tokens) << "trial " << trial;
    }
}

TEST(SessionProperty, MeanAcceptanceLengthIsBounded)
{
    std::mt19937_64 rng(78);
    for (int trial = 0; trial < 40; ++trial)
    {
        auto model = TableModel::random(4, 1, rng(), 3.0);
        EngineConfig cfg;
        cfg.ngram_len = 1 + rng() % 6;
        cfg.max_new_tokens = 50;
        Session s(model, cfg, random_prompt(rng, 3, 20));
        auto result = s.generate();
        auto const m = metrics(result.steps);
        ASSERT_GE(m.mal, 1.0);
        ASSERT_LE(m.mal, static_cast<double>(cfg.ngram_len + 1));
        ASSERT_EQ(m.tokens, result.sequence.generated().size());
    }
}

TEST(Metrics, MeanAcceptanceLength)
{
    EXPECT_DOUBLE_EQ(metrics({accepted(0), accepted(0)}).mal, 1.0);
    EXPECT_DOUBLE_EQ(metrics({accepted(6), accepted(2), accepted(1)}).mal, 4.0);
    EXPECT_THROW(metrics({}), Error);
}

TEST(Metrics, OriginAndAlignmentBuckets)
{
    StepRecord r = accepted(1);
    NodeRecord n;
    n.origin = Origin::InputContext;
    n.aligned = true;
    n.committed = true;
    r.nodes.push_back(n);
    n.aligned = false;
    n.committed = false;
    r.nodes.push_back(n);
    n.origin = Origin::AlignmentSampled;
    n.aligned.reset();
    r.nodes.push_back(n);
    auto const m = metrics({r});
    EXPECT_EQ(m.input.drafted, 2u);
    EXPECT_EQ(m.input.accepted, 1u);
    EXPECT_EQ(m.sampled.rate(), 0.0);
    EXPECT_FALSE(m.generated.rate().has_value());
    EXPECT_EQ(m.aligned.rate(), 1.0);
    EXPECT_EQ(m.misaligned.rate(), 0.0);
    EXPECT_FALSE(m.tokens_per_second().has_value());
}
