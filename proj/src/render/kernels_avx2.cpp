// Compiled with -mavx2 (no FMA: results must match the scalar kernels bit for bit).
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "peye/simd/kernels.hpp"

namespace peye::simd::avx2 {

void raster_span(const TriangleSetup& t, int y, int x_begin, int x_end, double* depth, std::uint32_t* id,
                 std::uint32_t* color) {
    const double py = static_cast<double>(y) + 0.5;
    const double r0 = t.edge[0].b * py + t.edge[0].c;
    const double r1 = t.edge[1].b * py + t.edge[1].c;
    const double r2 = t.edge[2].b * py + t.edge[2].c;

    const __m256d a0 = _mm256_set1_pd(t.edge[0].a), a1 = _mm256_set1_pd(t.edge[1].a),
                  a2 = _mm256_set1_pd(t.edge[2].a);
    const __m256d c0 = _mm256_set1_pd(r0), c1 = _mm256_set1_pd(r1), c2 = _mm256_set1_pd(r2);
    const __m256d k0 = _mm256_set1_pd(t.k[0]), k1 = _mm256_set1_pd(t.k[1]), k2 = _mm256_set1_pd(t.k[2]);
    const __m256d zero = _mm256_setzero_pd(), one = _mm256_set1_pd(1.0), far = _mm256_set1_pd(t.far);
    const __m256d tri_id = _mm256_set1_pd(static_cast<double>(t.id));
    const __m256d lane_offset = _mm256_set_pd(3.5, 2.5, 1.5, 0.5);
    const __m128i id_vec = _mm_set1_epi32(static_cast<int>(t.id));
    const __m128i color_vec = _mm_set1_epi32(static_cast<int>(t.color));
    const __m256i pack_lo = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);

    auto inside = [&](__m256d e, bool inclusive) {
        return inclusive ? _mm256_cmp_pd(e, zero, _CMP_GE_OQ) : _mm256_cmp_pd(e, zero, _CMP_GT_OQ);
    };

    int x = x_begin;
    for (; x + 4 <= x_end; x += 4) {
        const __m256d px = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(x)), lane_offset);
        const __m256d e0 = _mm256_add_pd(_mm256_mul_pd(a0, px), c0);
        const __m256d e1 = _mm256_add_pd(_mm256_mul_pd(a1, px), c1);
        const __m256d e2 = _mm256_add_pd(_mm256_mul_pd(a2, px), c2);
        __m256d mask = _mm256_and_pd(_mm256_and_pd(inside(e0, t.edge[0].inclusive), inside(e1, t.edge[1].inclusive)),
                                     inside(e2, t.edge[2].inclusive));
        if (_mm256_movemask_pd(mask) == 0) continue;

        const __m256d inv_z =
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e0, k0), _mm256_mul_pd(e1, k1)), _mm256_mul_pd(e2, k2));
        const __m256d z = _mm256_div_pd(one, inv_z);

        const std::size_t i = static_cast<std::size_t>(x - x_begin);
        const __m256d zb = _mm256_loadu_pd(depth + i);
        const __m128i idb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(id + i));
        const __m256d idb_d = _mm256_cvtepi32_pd(idb);
        const __m256d closer = _mm256_or_pd(
            _mm256_cmp_pd(z, zb, _CMP_LT_OQ),
            _mm256_and_pd(_mm256_cmp_pd(z, zb, _CMP_EQ_OQ), _mm256_cmp_pd(tri_id, idb_d, _CMP_LT_OQ)));
        mask = _mm256_and_pd(mask, closer);
        mask = _mm256_and_pd(mask, _mm256_cmp_pd(z, zero, _CMP_GT_OQ));
        mask = _mm256_and_pd(mask, _mm256_cmp_pd(z, far, _CMP_LE_OQ));
        if (_mm256_movemask_pd(mask) == 0) continue;

        _mm256_storeu_pd(depth + i, _mm256_blendv_pd(zb, z, mask));
        const __m128i m32 =
            _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(_mm256_castpd_si256(mask), pack_lo));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(id + i), _mm_blendv_epi8(idb, id_vec, m32));
        const __m128i cb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(color + i));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(color + i), _mm_blendv_epi8(cb, color_vec, m32));
    }
    if (x < x_end) {
        const std::size_t i = static_cast<std::size_t>(x - x_begin);
        scalar_kernels().raster_span(t, y, x, x_end, depth + i, id + i, color + i);
    }
}

void quantize_depth_cm(const float* depth, std::uint16_t* out, std::size_t n) {
    const __m256d hundred = _mm256_set1_pd(100.0), cap = _mm256_set1_pd(65535.0);
    const __m128 inf = _mm_set1_ps(std::numeric_limits<float>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128 d = _mm_loadu_ps(depth + i);
        const __m256d cm = _mm256_min_pd(_mm256_floor_pd(_mm256_mul_pd(_mm256_cvtps_pd(d), hundred)), cap);
        __m128i v = _mm256_cvttpd_epi32(cm);
        const __m128i is_inf = _mm_castps_si128(_mm_cmpeq_ps(d, inf));
        v = _mm_andnot_si128(is_inf, v);
        _mm_storel_epi64(reinterpret_cast<__m128i*>(out + i), _mm_packus_epi32(v, v));
    }
    if (i < n) scalar_kernels().quantize_depth_cm(depth + i, out + i, n - i);
}

void blend_rgb(const std::uint8_t* src, std::uint8_t* dst, const float* factor, std::size_t pixels,
               const float target[3]) {
    // 8 pixels = 24 bytes = three 8-float groups; each group needs its own
    // per-byte factor/target pattern
    const __m256i idx[3] = {_mm256_setr_epi32(0, 0, 0, 1, 1, 1, 2, 2), _mm256_setr_epi32(2, 3, 3, 3, 4, 4, 4, 5),
                            _mm256_setr_epi32(5, 5, 6, 6, 6, 7, 7, 7)};
    const float r = target[0], g = target[1], b = target[2];
    const __m256 tgt[3] = {_mm256_setr_ps(r, g, b, r, g, b, r, g), _mm256_setr_ps(b, r, g, b, r, g, b, r),
                           _mm256_setr_ps(g, b, r, g, b, r, g, b)};
    const __m256 lo = _mm256_setzero_ps(), hi = _mm256_set1_ps(255.0f);

    std::size_t p = 0;
    for (; p + 8 <= pixels; p += 8) {
        const __m256 f8 = _mm256_loadu_ps(factor + p);
        for (int k = 0; k < 3; ++k) {
            const std::uint8_t* s = src + 3 * p + 8 * k;
            const __m256 v = _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(s))));
            const __m256 f = _mm256_permutevar8x32_ps(f8, idx[k]);
            __m256 res = _mm256_add_ps(v, _mm256_mul_ps(_mm256_sub_ps(tgt[k], v), f));
            res = _mm256_round_ps(res, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
            res = _mm256_min_ps(_mm256_max_ps(res, lo), hi);
            const __m256i iv = _mm256_cvttps_epi32(res);
            const __m128i w = _mm_packus_epi32(_mm256_castsi256_si128(iv), _mm256_extracti128_si256(iv, 1));
            _mm_storel_epi64(reinterpret_cast<__m128i*>(dst + 3 * p + 8 * k), _mm_packus_epi16(w, w));
        }
    }
    if (p < pixels) scalar_kernels().blend_rgb(src + 3 * p, dst + 3 * p, factor + p, pixels - p, target);
}

}  // namespace peye::simd::avx2
