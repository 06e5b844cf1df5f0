// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reductions over probability vectors. Every verification step and every greedy step runs
// these over the full vocabulary, so they come in a scalar reference flavour and an AVX2
// flavour; the table is picked once at startup from cpuid and can be pinned for tests.

#include <cstddef>
#include <span>
#include <string_view>

namespace ctxspec::kernels
{

enum class Isa
{
    Scalar,
    Avx2,
};

std::string_view to_string(Isa isa);

struct MaxResult
{
    std::size_t index = 0; // first index holding the maximum
    double value = 0.0;
};

struct KernelTable
{
    Isa isa;
    double (*sum)(double const* p, std::size_t n);
    // n must be > 0.
    MaxResult (*max_first)(double const* p, std::size_t n);
    // -sum p ln p, zero entries contribute nothing.
    double (*entropy)(double const* p, std::size_t n);
    // Number of entries strictly greater than v, plus entries equal to v at index < pivot.
    std::size_t (*count_ranked_before)(double const* p, std::size_t n, double v, std::size_t pivot);
};

KernelTable const& scalar_table();

// nullptr when not compiled in or the CPU lacks the extension.
KernelTable const* avx2_table();

Isa detected_isa();

// The table used by the library. Defaults to the best detected ISA; the CTXSPEC_ISA environment
// variable ("scalar" / "avx2") overrides at first use.
KernelTable const& active();

// Returns false when the requested ISA is unavailable.
bool select(Isa isa);

inline double sum(std::span<double const> p)
{
    return active().sum(p.data(), p.size());
}

inline MaxResult max_first(std::span<double const> p)
{
    return active().max_first(p.data(), p.size());
}

inline double entropy(std::span<double const> p)
{
    return active().entropy(p.data(), p.size());
}

inline std::size_t count_ranked_before(std::span<double const> p, double v, std::size_t pivot)
{
    return active().count_ranked_before(p.data(), p.size(), v, pivot);
}

namespace detail
{
// Defined in the per-ISA translation units.
KernelTable const* make_avx2_table();
} // namespace detail

} // namespace ctxspec::kernels
