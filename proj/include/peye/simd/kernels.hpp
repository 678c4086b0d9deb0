#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace peye::simd {

/// Edge function E(px, py) = a*px + b*py + c, evaluated per pixel centre.
/// Pixels with E == 0 are covered only when `inclusive` (top-left rule).
struct EdgeCoeffs {
    double a = 0.0, b = 0.0, c = 0.0;
    bool inclusive = false;
};

/// A screen-space triangle ready for scan conversion. Interpolated inverse
/// depth is E0*k[0] + E1*k[1] + E2*k[2], with k[i] = (1/z_i) / (2*area).
struct TriangleSetup {
    EdgeCoeffs edge[3];
    double k[3] = {0.0, 0.0, 0.0};
    double far = 0.0;
    std::uint32_t id = 0;
    std::uint32_t color = 0;
    int x_min = 0, x_max = -1;  ///< inclusive pixel bounds
    int y_min = 0, y_max = -1;
};

/// Depth-tests and writes pixels [x_begin, x_end) of row y. The row pointers
/// address pixel x_begin. Closer depth wins; exact ties go to the lower id.
using RasterSpanFn = void (*)(const TriangleSetup& tri, int y, int x_begin, int x_end, double* depth,
                              std::uint32_t* id, std::uint32_t* color);

/// out[i] = 0 if depth is +inf, else min(65535, floor(depth * 100)).
using QuantizeDepthFn = void (*)(const float* depth, std::uint16_t* out, std::size_t n);

/// Interleaved RGB blend toward `target` with one factor per pixel:
/// v' = clamp(round_even(v + (t - v) * f), 0, 255).
using BlendRgbFn = void (*)(const std::uint8_t* src, std::uint8_t* dst, const float* factor, std::size_t pixels,
                            const float target[3]);

struct KernelTable {
    std::string_view name;
    RasterSpanFn raster_span;
    QuantizeDepthFn quantize_depth_cm;
    BlendRgbFn blend_rgb;
};

const KernelTable& scalar_kernels();
/// nullopt when the binary or the CPU lacks AVX2.
std::optional<KernelTable> avx2_kernels();

/// Chosen once per process: AVX2 when available unless PEYE_SIMD=scalar.
const KernelTable& active_kernels();

}  // namespace peye::simd
