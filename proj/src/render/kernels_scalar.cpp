#include <algorithm>
#include <cmath>
#include <limits>

#include "peye/simd/kernels.hpp"

namespace peye::simd {

namespace {

void raster_span_scalar(const TriangleSetup& t, int y, int x_begin, int x_end, double* depth,
                        std::uint32_t* id, std::uint32_t* color) {
    const double py = static_cast<double>(y) + 0.5;
    const double r0 = t.edge[0].b * py + t.edge[0].c;
    const double r1 = t.edge[1].b * py + t.edge[1].c;
    const double r2 = t.edge[2].b * py + t.edge[2].c;
    for (int x = x_begin; x < x_end; ++x) {
        const double px = static_cast<double>(x) + 0.5;
        const double e0 = t.edge[0].a * px + r0;
        const double e1 = t.edge[1].a * px + r1;
        const double e2 = t.edge[2].a * px + r2;
        const bool in0 = t.edge[0].inclusive ? e0 >= 0.0 : e0 > 0.0;
        const bool in1 = t.edge[1].inclusive ? e1 >= 0.0 : e1 > 0.0;
        const bool in2 = t.edge[2].inclusive ? e2 >= 0.0 : e2 > 0.0;
        if (!(in0 && in1 && in2)) continue;
        const double inv_z = (e0 * t.k[0] + e1 * t.k[1]) + e2 * t.k[2];
        const double z = 1.0 / inv_z;
        const std::size_t i = static_cast<std::size_t>(x - x_begin);
        const bool closer = z < depth[i] || (z == depth[i] && t.id < id[i]);
        if (z > 0.0 && z <= t.far && closer) {
            depth[i] = z;
            id[i] = t.id;
            color[i] = t.color;
        }
    }
}

void quantize_depth_scalar(const float* depth, std::uint16_t* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const float d = depth[i];
        if (d == std::numeric_limits<float>::infinity()) {
            out[i] = 0;
            continue;
        }
        const double cm = std::min(std::floor(static_cast<double>(d) * 100.0), 65535.0);
        out[i] = static_cast<std::uint16_t>(static_cast<std::int32_t>(cm));
    }
}

void blend_rgb_scalar(const std::uint8_t* src, std::uint8_t* dst, const float* factor, std::size_t pixels,
                      const float target[3]) {
    for (std::size_t p = 0; p < pixels; ++p) {
        const float f = factor[p];
        for (int c = 0; c < 3; ++c) {
            const float v = static_cast<float>(src[3 * p + c]);
            const float r = std::nearbyint(v + (target[c] - v) * f);
            dst[3 * p + c] = static_cast<std::uint8_t>(std::clamp(r, 0.0f, 255.0f));
        }
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", &raster_span_scalar, &quantize_depth_scalar, &blend_rgb_scalar};
    return table;
}

}  // namespace peye::simd
