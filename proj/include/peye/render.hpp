#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "peye/classes.hpp"
#include "peye/geometry.hpp"
#include "peye/worldgen.hpp"

namespace peye {

inline constexpr double kNearPlane = 0.5;

/// Pinhole camera. Image origin top-left, pixel centres at integer + 0.5.
struct Intrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;
    double near = kNearPlane;
};

/// fx = fy = (W/2) / tan(fov_h/2), principal point at the image centre.
/// Throws Error(InvalidArgument) unless 0 < fov_h < 180.
Intrinsics intrinsics_from_fov(double fov_h_deg, int width, int height);

/// Throws Error(BehindCamera) when p.z < near.
Vec2 project_point(const Intrinsics& K, const Vec3& p_cam);
Vec3 unproject(const Intrinsics& K, double u, double v, double z);

struct FrameBuffers {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;      ///< H*W*3, row-major
    std::vector<float> depth;           ///< metres, +inf where nothing was hit
    std::vector<std::uint32_t> instance;  ///< 0 = background
    std::vector<std::uint16_t> cls;     ///< ObjectClass values

    FrameBuffers() = default;
    FrameBuffers(int w, int h);

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

enum class Weather { Sunny, Cloudy, Rainy, Foggy };
std::string_view weather_name(Weather w);
/// Accepts sunny/cloudy/rainy/foggy. Throws Error(InvalidArgument) otherwise.
Weather weather_from_name(std::string_view name);

struct RenderSettings {
    Weather weather = Weather::Sunny;
    double time_of_day = 12.0;  ///< hours in [0, 24)
    double fog_beta = 0.008;    ///< 1/m
    double draw_distance = 150.0;
    bool culling = true;
    bool lod = false;
    double lod_near = 50.0;   ///< d1
    double lod_far = 120.0;   ///< d2
    int bands = 1;            ///< horizontal bands rendered on separate threads
};

/// Unit vector toward the sun. Elevation 90*sin(pi*(t-6)/12) between 06:00
/// and 18:00 (0 otherwise); azimuth moves east to west linearly over the day.
Vec3 sun_direction(double time_of_day);

/// Flat Lambert: base * (0.3 + 0.7 * max(0, n.l)), rounded and clamped.
Rgb shade(ObjectClass cls, const Vec3& normal, const Vec3& light, Rgb base);

/// 0 below d1, 1 in [d1, d2), 2 from d2 on.
int select_lod(double distance, double lod_near, double lod_far);

/// Indices of entities whose bounding sphere intersects the view frustum
/// truncated at draw_distance. Uses LOD 0 bounds.
std::vector<std::size_t> frustum_cull(std::span<const Entity> entities, const RigidTransform& camera_to_world,
                                      const Intrinsics& K, double draw_distance);

/// Z-buffer render of all entities into RGB, depth, instance and class
/// buffers. Pixel results do not depend on entity order, culling or band count.
FrameBuffers rasterize(std::span<const Entity> entities, const RigidTransform& camera_to_world, const Intrinsics& K,
                       const RenderSettings& settings);
FrameBuffers rasterize(const World& world, const RigidTransform& camera_to_world, const Intrinsics& K,
                       const RenderSettings& settings);

/// Pixel coverage of a single entity rendered alone, using exactly the same
/// coverage rules (LOD, near clipping, draw distance) as rasterize().
struct SoloCoverage {
    std::size_t pixels = 0;
    int x_min = 0, x_max = -1, y_min = 0, y_max = -1;  ///< 0-based, inclusive
    bool near_clipped = false;
};
SoloCoverage render_solo(const Entity& entity, const RigidTransform& camera_to_world, const Intrinsics& K,
                         const RenderSettings& settings);

/// Weather post-effects on RGB only; depth, instance and class are untouched.
void apply_weather(FrameBuffers& buffers, const RenderSettings& settings, std::uint64_t frame_seed);

Rgb sky_color(const RenderSettings& settings);

/// Bright / fog target colours used by apply_weather.
inline constexpr Rgb kFogColor{190, 190, 195};

}  // namespace peye
