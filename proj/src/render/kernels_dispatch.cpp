#include <cstdlib>
#include <string_view>

#include "peye/simd/kernels.hpp"

#if defined(PEYE_HAVE_AVX2_TU)
namespace peye::simd::avx2 {
void raster_span(const TriangleSetup&, int, int, int, double*, std::uint32_t*, std::uint32_t*);
void quantize_depth_cm(const float*, std::uint16_t*, std::size_t);
void blend_rgb(const std::uint8_t*, std::uint8_t*, const float*, std::size_t, const float[3]);
}  // namespace peye::simd::avx2
#endif

namespace peye::simd {

std::optional<KernelTable> avx2_kernels() {
#if defined(PEYE_HAVE_AVX2_TU)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) {
        return KernelTable{"avx2", &avx2::raster_span, &avx2::quantize_depth_cm, &avx2::blend_rgb};
    }
#endif
    return std::nullopt;
}

const KernelTable& active_kernels() {
    static const KernelTable table = [] {
        const char* force = std::getenv("PEYE_SIMD");
        if (force != nullptr && std::string_view(force) == "scalar") return scalar_kernels();
        if (auto avx = avx2_kernels()) return *avx;
        return scalar_kernels();
    }();
    return table;
}

}  // namespace peye::simd
