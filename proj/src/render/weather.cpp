#include <algorithm>
#include <cmath>
#include <vector>

#include "peye/render.hpp"
#include "peye/seed.hpp"
#include "peye/simd/kernels.hpp"

namespace peye {

namespace {

constexpr float kBlack[3] = {0.0f, 0.0f, 0.0f};
constexpr float kRainColor[3] = {200.0f, 200.0f, 210.0f};
constexpr float kCloudyDim = 0.3f;  // blend toward black, i.e. 70% brightness
constexpr float kRainDim = 0.2f;
constexpr float kStreakStrength = 0.35f;

void dim(FrameBuffers& fb, float amount) {
    const std::vector<float> f(fb.pixel_count(), amount);
    simd::active_kernels().blend_rgb(fb.rgb.data(), fb.rgb.data(), f.data(), fb.pixel_count(), kBlack);
}

void fog(FrameBuffers& fb, const RenderSettings& s) {
    std::vector<float> f(fb.pixel_count());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = std::isinf(fb.depth[i]) ? s.draw_distance : static_cast<double>(fb.depth[i]);
        f[i] = static_cast<float>(1.0 - std::exp(-s.fog_beta * d));
    }
    const float target[3] = {static_cast<float>(kFogColor.r), static_cast<float>(kFogColor.g),
                             static_cast<float>(kFogColor.b)};
    simd::active_kernels().blend_rgb(fb.rgb.data(), fb.rgb.data(), f.data(), fb.pixel_count(), target);
}

/// Thin slanted streaks, a few pixels wide in x and tens of pixels long.
void rain(FrameBuffers& fb, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x7261696eULL));
    const std::size_t streaks = fb.pixel_count() / 600;
    std::vector<float> f(fb.pixel_count(), 0.0f);
    for (std::size_t k = 0; k < streaks; ++k) {
        const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(fb.width)));
        const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(fb.height)));
        const int len = 8 + static_cast<int>(rng.below(24));
        for (int j = 0; j < len; ++j) {
            const int x = x0 + j / 6;
            const int y = y0 + j;
            if (x >= fb.width || y >= fb.height) break;
            f[fb.index(x, y)] = kStreakStrength;
        }
    }
    simd::active_kernels().blend_rgb(fb.rgb.data(), fb.rgb.data(), f.data(), fb.pixel_count(), kRainColor);
}

}  // namespace

Rgb sky_color(const RenderSettings& settings) {
    if (settings.weather == Weather::Sunny) return {135, 185, 235};
    return {165, 170, 178};
}

void apply_weather(FrameBuffers& buffers, const RenderSettings& settings, std::uint64_t seed) {
    switch (settings.weather) {
        case Weather::Sunny:
            return;
        case Weather::Cloudy:
            dim(buffers, kCloudyDim);
            return;
        case Weather::Rainy:
            dim(buffers, kRainDim);
            rain(buffers, seed);
            return;
        case Weather::Foggy:
            fog(buffers, settings);
            return;
    }
}

}  // namespace peye
