// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/kernels.hpp"

#include <cmath>

namespace ctxspec::kernels
{
namespace
{

double sum_scalar(double const* p, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        acc += p[i];
    }
    return acc;
}

MaxResult max_first_scalar(double const* p, std::size_t n)
{
    MaxResult best{0, p[0]};
    for (std::size_t i = 1; i < n; ++i)
    {
        if (p[i] > best.value)
        {
            best = {i, p[i]};
        }
    }
    return best;
}

double entropy_scalar(double const* p, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (p[i] > 0.0)
        {
            acc -= p[i] * std::log(p[i]);
        }
    }
    return acc;
}

std::size_t count_ranked_before_scalar(double const* p, std::size_t n, double v, std::size_t pivot)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (p[i] > v || (p[i] == v && i < pivot))
        {
            ++count;
        }
    }
    return count;
}

} // namespace

KernelTable const& scalar_table()
{
    static constexpr KernelTable table{
        Isa::Scalar, &sum_scalar, &max_first_scalar, &entropy_scalar, &count_ranked_before_scalar};
    return table;
}

} // namespace ctxspec::kernels
