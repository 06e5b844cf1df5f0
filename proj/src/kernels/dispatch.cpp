// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctxspec/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace ctxspec::kernels
{

std::string_view to_string(Isa isa)
{
    switch (isa)
    {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

KernelTable const* avx2_table()
{
#if defined(__x86_64__) || defined(__i386__)
    static bool const supported = __builtin_cpu_supports("avx2");
    if (!supported)
    {
        return nullptr;
    }
#endif
    return detail::make_avx2_table();
}

Isa detected_isa()
{
    return avx2_table() != nullptr ? Isa::Avx2 : Isa::Scalar;
}

namespace
{

KernelTable const* initial_table()
{
    if (char const* env = std::getenv("CTXSPEC_ISA"))
    {
        std::string const want(env);
        if (want == "scalar")
        {
            return &scalar_table();
        }
        if (want == "avx2" && avx2_table() != nullptr)
        {
            return avx2_table();
        }
    }
    if (auto const* t = avx2_table())
    {
        return t;
    }
    return &scalar_table();
}

std::atomic<KernelTable const*>& current()
{
    static std::atomic<KernelTable const*> table{initial_table()};
    return table;
}

} // namespace

KernelTable const& active()
{
    return *current().load(std::memory_order_relaxed);
}

bool select(Isa isa)
{
    KernelTable const* table = isa == Isa::Scalar ? &scalar_table() : avx2_table();
    if (table == nullptr)
    {
        return false;
    }
    current().store(table, std::memory_order_relaxed);
    return true;
}

} // namespace ctxspec::kernels
