// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/corpus.hpp"

#include "ctxspec/models.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ctxspec
{
namespace
{

std::vector<TokenId> tokens_field(nlohmann::json const& value, std::string const& where)
{
    if (value.is_string())
    {
        return tokenize_bytes(value.get<std::string>());
    }
    if (value.is_array())
    {
        std::vector<TokenId> out;
        out.reserve(value.size());
        for (auto const& v : value)
        {
            if (!v.is_number_integer() || v.get<long long>() < 0)
            {
                throw Error(ErrorCode::BadCorpus, where + ": token lists hold non-negative integers");
            }
            out.push_back(v.get<TokenId>());
        }
        return out;
    }
    throw Error(ErrorCode::BadCorpus, where + ": expected a token list or a string");
}

} // namespace

std::vector<CorpusItem> parse_corpus(std::string_view text)
{
    std::vector<CorpusItem> items;
    std::set<std::string> ids;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
        {
            continue;
        }
        std::string const where = "line " + std::to_string(lineno);
        nlohmann::json rec;
        try
        {
            rec = nlohmann::json::parse(line);
        }
        catch (nlohmann::json::exception const&)
        {
            throw Error(ErrorCode::BadCorpus, where + ": not a JSON object");
        }
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("prompt"))
        {
            throw Error(ErrorCode::BadCorpus, where + ": records need \"id\" and \"prompt\"");
        }
        CorpusItem item;
        item.id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
        item.prompt = tokens_field(rec["prompt"], where);
        if (item.prompt.empty())
        {
            throw Error(ErrorCode::BadCorpus, where + ": empty prompt");
        }
        if (rec.contains("reference") && !rec["reference"].is_null())
        {
            item.reference = tokens_field(rec["reference"], where);
        }
        if (!ids.insert(item.id).second)
        {
            throw Error(ErrorCode::BadCorpus, where + ": duplicate id '" + item.id + "'");
        }
        items.push_back(std::move(item));
    }
    if (items.empty())
    {
        throw Error(ErrorCode::BadCorpus, "corpus holds no items");
    }
    return items;
}

std::vector<CorpusItem> load_corpus(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorCode::BadCorpus, "cannot open corpus " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str());
}

std::string format_corpus(std::vector<CorpusItem> const& items)
{
    std::string out;
    for (auto const& item : items)
    {
        nlohmann::json rec;
        rec["id"] = item.id;
        rec["prompt"] = item.prompt;
        if (item.reference)
        {
            rec["reference"] = *item.reference;
        }
        out += rec.dump();
        out += '\n';
    }
    return out;
}

} // namespace ctxspec
