// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/models.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace ctxspec
{

std::vector<Distribution> LanguageModel::prefill(std::span<TokenId const> seq) const
{
    std::vector<Distribution> out;
    out.reserve(seq.size());
    for (std::size_t i = 1; i <= seq.size(); ++i)
    {
        out.push_back(next(seq.first(i)));
    }
    return out;
}

std::vector<Distribution> LanguageModel::forward_tree(
    std::span<TokenId const> committed, DraftTree const& tree, TreeMask const& mask) const
{
    if (committed.empty() || tree.node(0).token != committed.back())
    {
        throw Error(ErrorCode::InvalidToken, "draft tree root must be the last committed token");
    }
    std::size_t const n = tree.size();
    std::vector<Distribution> out;
    out.reserve(n);
    std::vector<TokenId> context(committed.begin(), committed.end());
    std::size_t const base = context.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        context.resize(base);
        for (std::size_t j = 1; j < n; ++j)
        {
            if (mask(i, j))
            {
                context.push_back(tree.node(j).token);
            }
        }
        out.push_back(next(context));
    }
    return out;
}

std::vector<Distribution> CountingModel::prefill(std::span<TokenId const> seq) const
{
    ++prefill_calls_;
    return inner_.prefill(seq);
}

std::vector<Distribution> CountingModel::forward_tree(
    std::span<TokenId const> committed, DraftTree const& tree, TreeMask const& mask) const
{
    ++forward_calls_;
    return inner_.forward_tree(committed, tree, mask);
}

// ---------------------------------------------------------------------------------------------
// TableModel

TableModel::TableModel(std::size_t vocab_size, std::size_t window)
    : vocab_(vocab_size)
    , window_(window)
{
    if (vocab_size == 0 || window == 0)
    {
        throw Error(ErrorCode::BadConfig, "table model needs a positive vocabulary and window");
    }
}

void TableModel::set_row(std::vector<TokenId> context, Distribution dist)
{
    if (auto err = validate_distribution(dist))
    {
        throw Error(*err, "table row does not validate");
    }
    if (dist.kind != DistKind::Full || dist.size() != vocab_)
    {
        throw Error(ErrorCode::NonNormalized, "table rows must be full distributions over the vocabulary");
    }
    if (context.size() > window_)
    {
        throw Error(ErrorCode::BadConfig, "table row context longer than the window");
    }
    for (TokenId t : context)
    {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab_)
        {
            throw Error(ErrorCode::InvalidToken, "table row context token outside vocabulary");
        }
    }
    rows_.insert_or_assign(std::move(context), std::move(dist));
}

Distribution TableModel::next(std::span<TokenId const> context) const
{
    std::size_t const take = std::min(window_, context.size());
    std::vector<TokenId> key(context.end() - static_cast<std::ptrdiff_t>(take), context.end());
    auto it = rows_.find(key);
    if (it == rows_.end())
    {
        return Distribution::uniform(vocab_);
    }
    return it->second;
}

TableModel TableModel::from_json_text(std::string const& text)
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(text);
    }
    catch (nlohmann::json::exception const& e)
    {
        throw Error(ErrorCode::BadConfig, std::string("table spec is not valid JSON: ") + e.what());
    }
    try
    {
        TableModel model(doc.at("vocab_size").get<std::size_t>(), doc.value("window", std::size_t{1}));
        for (auto const& row : doc.value("rows", nlohmann::json::array()))
        {
            auto context = row.at("context").get<std::vector<TokenId>>();
            std::vector<double> probs;
            if (row.contains("probs"))
            {
                probs = row.at("probs").get<std::vector<double>>();
            }
            else
            {
                auto const peaks = row.at("peaks").get<std::vector<std::pair<TokenId, double>>>();
                probs.assign(model.vocab_, 0.0);
                double placed = 0.0;
                std::vector<char> listed(model.vocab_, 0);
                for (auto const& [tok, p] : peaks)
                {
                    if (tok < 0 || static_cast<std::size_t>(tok) >= model.vocab_)
                    {
                        throw Error(ErrorCode::InvalidToken, "peak token outside vocabulary");
                    }
                    probs[static_cast<std::size_t>(tok)] += p;
                    listed[static_cast<std::size_t>(tok)] = 1;
                    placed += p;
                }
                auto const rest = static_cast<double>(std::count(listed.begin(), listed.end(), 0));
                if (rest > 0)
                {
                    double const share = std::max(0.0, 1.0 - placed) / rest;
                    for (std::size_t t = 0; t < model.vocab_; ++t)
                    {
                        if (!listed[t])
                        {
                            probs[t] = share;
                        }
                    }
                }
            }
            model.set_row(std::move(context), Distribution::full(std::move(probs)));
        }
        return model;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw Error(ErrorCode::BadConfig, std::string("malformed table spec: ") + e.what());
    }
}

TableModel TableModel::load(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::BadConfig, "cannot open table spec " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

TableModel TableModel::random(std::size_t vocab_size, std::size_t window, std::uint64_t seed, double sharpness)
{
    double rows = std::pow(static_cast<double>(vocab_size), static_cast<double>(window));
    if (rows > static_cast<double>(1u << 20))
    {
        throw Error(ErrorCode::BadConfig, "random table would exceed 2^20 rows");
    }
    TableModel model(vocab_size, window);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<TokenId> context(window, 0);
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r)
    {
        std::size_t code = r;
        for (std::size_t i = 0; i < window; ++i)
        {
            context[window - 1 - i] = static_cast<TokenId>(code % vocab_size);
            code /= vocab_size;
        }
        std::vector<double> w(vocab_size);
        double total = 0.0;
        for (auto& x : w)
        {
            x = std::exp(sharpness * gauss(rng));
            total += x;
        }
        for (auto& x : w)
        {
            x /= total;
        }
        model.rows_.insert_or_assign(context, Distribution::full(std::move(w)));
    }
    return model;
}

// ---------------------------------------------------------------------------------------------
// NGramLM

std::size_t NGramLM::KeyHash::operator()(Key const& key) const noexcept
{
    std::size_t h = 1469598103934665603ull;
    for (TokenId t : key)
    {
        h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(t));
        h *= 1099511628211ull;
    }
    return h;
}

NGramLM NGramLM::train(std::span<TokenId const> stream, std::size_t order, double smoothing, std::size_t vocab_size)
{
    if (stream.empty())
    {
        throw Error(ErrorCode::UntrainedModel, "n-gram model needs a non-empty training stream");
    }
    if (order == 0 || vocab_size == 0 || !(smoothing >= 0.0))
    {
        throw Error(ErrorCode::BadConfig, "n-gram model needs order >= 1, vocab >= 1 and k >= 0");
    }
    for (TokenId t : stream)
    {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab_size)
        {
            throw Error(ErrorCode::InvalidToken, "training token outside vocabulary");
        }
    }
    NGramLM lm;
    lm.order_ = order;
    lm.smoothing_ = smoothing;
    lm.vocab_ = vocab_size;
    lm.tables_.resize(order);
    Key key;
    for (std::size_t c = 0; c < order; ++c)
    {
        auto& table = lm.tables_[c];
        for (std::size_t i = c; i < stream.size(); ++i)
        {
            key.assign(stream.begin() + static_cast<std::ptrdiff_t>(i - c), stream.begin() + static_cast<std::ptrdiff_t>(i));
            Row& row = table[key];
            ++row.total;
            ++row.counts[stream[i]];
        }
    }
    return lm;
}

NGramLM::Row const* NGramLM::find_row(std::span<TokenId const> context) const
{
    std::size_t const c = std::min(order_ - 1, context.size());
    Key key(context.end() - static_cast<std::ptrdiff_t>(c), context.end());
    auto const& table = tables_[c];
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
}

double NGramLM::ngram_prob(std::span<TokenId const> context, TokenId token) const
{
    if (!trained())
    {
        throw Error(ErrorCode::UntrainedModel, "n-gram model has not been trained");
    }
    Row const* row = find_row(context);
    auto const v = static_cast<double>(vocab_);
    if (row == nullptr || row->total == 0)
    {
        return 1.0 / v;
    }
    auto it = row->counts.find(token);
    double const count = it == row->counts.end() ? 0.0 : static_cast<double>(it->second);
    return (count + smoothing_) / (static_cast<double>(row->total) + smoothing_ * v);
}

Distribution NGramLM::next(std::span<TokenId const> context) const
{
    if (!trained())
    {
        throw Error(ErrorCode::UntrainedModel, "n-gram model has not been trained");
    }
    Row const* row = find_row(context);
    auto const v = static_cast<double>(vocab_);
    if (row == nullptr || row->total == 0)
    {
        return Distribution::uniform(vocab_);
    }
    double const denom = static_cast<double>(row->total) + smoothing_ * v;
    std::vector<double> probs(vocab_, smoothing_ / denom);
    for (auto const& [tok, count] : row->counts)
    {
        probs[static_cast<std::size_t>(tok)] = (static_cast<double>(count) + smoothing_) / denom;
    }
    return Distribution::full(std::move(probs));
}

// ---------------------------------------------------------------------------------------------

TokenSeq greedy_decode(LanguageModel const& model, TokenSeq seq, std::size_t max_new, TokenId eos)
{
    for (std::size_t i = 0; i < max_new; ++i)
    {
        TokenId const t = argmax(model.next(seq.tokens)).token;
        seq.tokens.push_back(t);
        if (t == eos)
        {
            break;
        }
    }
    return seq;
}

std::vector<TokenId> read_token_stream(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::BadConfig, "cannot open token stream " + path.string());
    }
    std::vector<TokenId> out;
    long long value = 0;
    while (in >> value)
    {
        if (value < 0 || value > INT32_MAX)
        {
            throw Error(ErrorCode::InvalidToken, "token stream value out of range");
        }
        out.push_back(static_cast<TokenId>(value));
    }
    if (!in.eof())
    {
        throw Error(ErrorCode::BadConfig, "token stream contains a non-integer entry: " + path.string());
    }
    return out;
}

std::vector<TokenId> tokenize_bytes(std::string_view text)
{
    std::vector<TokenId> out;
    out.reserve(text.size());
    for (char c : text)
    {
        out.push_back(static_cast<TokenId>(static_cast<unsigned char>(c)));
    }
    return out;
}

std::vector<TokenId> read_byte_stream(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorCode::BadConfig, "cannot open text stream " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return tokenize_bytes(buf.str());
}

namespace
{

std::vector<std::string> split(std::string const& text, char sep)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep))
    {
        parts.push_back(part);
    }
    return parts;
}

} // namespace

std::unique_ptr<LanguageModel> load_model(std::string const& spec)
{
    auto const colon = spec.find(':');
    if (colon == std::string::npos)
    {
        throw Error(ErrorCode::BadConfig, "model spec must look like table:<file> or ngram:<file>,<order>,<k>");
    }
    std::string const kind = spec.substr(0, colon);
    std::string const rest = spec.substr(colon + 1);
    if (kind == "table")
    {
        return std::make_unique<TableModel>(TableModel::load(rest));
    }
    if (kind == "ngram" || kind == "ngram-text")
    {
        auto const parts = split(rest, ',');
        if (parts.size() < 3 || parts.size() > 4)
        {
            throw Error(ErrorCode::BadConfig, "expected " + kind + ":<file>,<order>,<k>[,<vocab>]");
        }
        std::size_t order = 0;
        double k = 0.0;
        std::size_t vocab = 0;
        try
        {
            order = std::stoul(parts[1]);
            k = std::stod(parts[2]);
            if (parts.size() == 4)
            {
                vocab = std::stoul(parts[3]);
            }
        }
        catch (std::exception const&)
        {
            throw Error(ErrorCode::BadConfig, "bad numeric field in model spec '" + spec + "'");
        }
        std::vector<TokenId> stream;
        if (kind == "ngram-text")
        {
            stream = read_byte_stream(parts[0]);
            vocab = std::max<std::size_t>(vocab, 256);
        }
        else
        {
            stream = read_token_stream(parts[0]);
            if (vocab == 0 && !stream.empty())
            {
                // EOS defaults to vocab-1, so keep one id past the largest seen token.
                vocab = static_cast<std::size_t>(*std::max_element(stream.begin(), stream.end())) + 2;
            }
        }
        return std::make_unique<NGramLM>(NGramLM::train(stream, order, k, vocab));
    }
    throw Error(ErrorCode::BadConfig, "unknown model kind '" + kind + "'");
}

} // namespace ctxspec
