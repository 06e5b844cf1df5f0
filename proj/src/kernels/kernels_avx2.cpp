// SPDX-FileCopyrightText: Copyright (c) 2026 The ctxspec Authors
// SPDX-License-Identifier: Apache-2.0

// Built with -mavx2; only reached through avx2_table() after a cpuid check.

#include "ctxspec/kernels.hpp"

#if defined(CTXSPEC_HAVE_AVX2)

#include <immintrin.h>

#include <bit>
#include <cfloat>
#include <cmath>
#include <cstdint>

namespace ctxspec::kernels
{
namespace
{

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double hmax(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, swapped));
}

double sum_avx2(double const* p, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
    {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + i + 4));
    }
    for (; i + 4 <= n; i += 4)
    {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
    {
        acc += p[i];
    }
    return acc;
}

MaxResult max_first_avx2(double const* p, std::size_t n)
{
    double best = p[0];
    std::size_t i = 0;
    if (n >= 4)
    {
        __m256d vmax = _mm256_loadu_pd(p);
        for (i = 4; i + 4 <= n; i += 4)
        {
            vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(p + i));
        }
        best = hmax(vmax);
    }
    for (; i < n; ++i)
    {
        best = p[i] > best ? p[i] : best;
    }

    // Second pass for the first index holding the maximum.
    __m256d const target = _mm256_set1_pd(best);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
    {
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(p + j), target, _CMP_EQ_OQ));
        if (mask != 0)
        {
            return {j + static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(mask))), best};
        }
    }
    for (; j < n; ++j)
    {
        if (p[j] == best)
        {
            return {j, best};
        }
    }
    return {0, best};
}

// Natural log for normal positive doubles (Cephes rational approximation, ~1 ulp).
inline __m256d log_pd(__m256d x)
{
    __m256i const bits = _mm256_castpd_si256(x);
    __m256i const mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    __m256i const half_bits = _mm256_set1_epi64x(0x3FE0000000000000LL);

    // Mantissa in [0.5, 1), exponent adjusted to match.
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));
    __m256i ebits = _mm256_srli_epi64(bits, 52);
    __m256d const magic = _mm256_set1_pd(4503599627370496.0); // 2^52
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(ebits, _mm256_castpd_si256(magic))), magic);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

    __m256d const one = _mm256_set1_pd(1.0);
    __m256d const small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
    // m < sqrt(1/2): x = 2m - 1, else x = m - 1
    __m256d xr = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), one);

    __m256d const z = _mm256_mul_pd(xr, xr);

    __m256d num = _mm256_set1_pd(1.01875663804580931796E-4);
    num = _mm256_add_pd(_mm256_mul_pd(num, xr), _mm256_set1_pd(4.97494994976747001425E-1));
    num = _mm256_add_pd(_mm256_mul_pd(num, xr), _mm256_set1_pd(4.70579119878881725854E0));
    num = _mm256_add_pd(_mm256_mul_pd(num, xr), _mm256_set1_pd(1.44989225341610930846E1));
    num = _mm256_add_pd(_mm256_mul_pd(num, xr), _mm256_set1_pd(1.79368678507819816313E1));
    num = _mm256_add_pd(_mm256_mul_pd(num, xr), _mm256_set1_pd(7.70838733755885391666E0));

    __m256d den = _mm256_add_pd(xr, _mm256_set1_pd(1.12873587189167450590E1));
    den = _mm256_add_pd(_mm256_mul_pd(den, xr), _mm256_set1_pd(4.52279145837532221105E1));
    den = _mm256_add_pd(_mm256_mul_pd(den, xr), _mm256_set1_pd(8.29875266912776603211E1));
    den = _mm256_add_pd(_mm256_mul_pd(den, xr), _mm256_set1_pd(7.11544750618563894466E1));
    den = _mm256_add_pd(_mm256_mul_pd(den, xr), _mm256_set1_pd(2.31251620126765340583E1));

    __m256d y = _mm256_mul_pd(xr, _mm256_div_pd(_mm256_mul_pd(z, num), den));
    y = _mm256_sub_pd(y, _mm256_mul_pd(e, _mm256_set1_pd(2.121944400546905827679E-4)));
    y = _mm256_sub_pd(y, _mm256_mul_pd(z, _mm256_set1_pd(0.5)));
    __m256d r = _mm256_add_pd(xr, y);
    return _mm256_add_pd(r, _mm256_mul_pd(e, _mm256_set1_pd(0.693359375)));
}

double entropy_avx2(double const* p, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    __m256d const tiny = _mm256_set1_pd(DBL_MIN);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
    {
        __m256d v = _mm256_loadu_pd(p + i);
        // Lanes at or below DBL_MIN contribute zero (their p ln p is below 1e-305 anyway).
        __m256d live = _mm256_cmp_pd(v, tiny, _CMP_GE_OQ);
        __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), v, live);
        __m256d term = _mm256_mul_pd(safe, log_pd(safe));
        acc = _mm256_add_pd(acc, _mm256_and_pd(live, term));
    }
    double total = -hsum(acc);
    for (; i < n; ++i)
    {
        if (p[i] > 0.0)
        {
            total -= p[i] * std::log(p[i]);
        }
    }
    return total;
}

std::size_t count_ranked_before_avx2(double const* p, std::size_t n, double v, std::size_t pivot)
{
    __m256d const target = _mm256_set1_pd(v);
    std::size_t const split = pivot < n ? pivot : n;
    std::size_t count = 0;
    std::size_t i = 0;
    // Before the pivot, ties also rank ahead.
    for (; i + 4 <= split; i += 4)
    {
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(p + i), target, _CMP_GE_OQ));
        count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
    }
    for (; i < split; ++i)
    {
        count += p[i] >= v ? 1 : 0;
    }
    for (; i + 4 <= n; i += 4)
    {
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(p + i), target, _CMP_GT_OQ));
        count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
    }
    for (; i < n; ++i)
    {
        count += p[i] > v ? 1 : 0;
    }
    return count;
}

} // namespace

namespace detail
{

KernelTable const* make_avx2_table()
{
    static constexpr KernelTable table{
        Isa::Avx2, &sum_avx2, &max_first_avx2, &entropy_avx2, &count_ranked_before_avx2};
    return &table;
}

} // namespace detail
} // namespace ctxspec::kernels

#else

namespace ctxspec::kernels::detail
{
KernelTable const* make_avx2_table()
{
    return nullptr;
}
} // namespace ctxspec::kernels::detail

#endif
