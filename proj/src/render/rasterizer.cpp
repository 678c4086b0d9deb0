#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "peye/error.hpp"
#include "peye/render.hpp"
#include "peye/simd/kernels.hpp"

namespace peye {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint32_t pack(Rgb c) {
    return static_cast<std::uint32_t>(c.r) | (static_cast<std::uint32_t>(c.g) << 8) |
           (static_cast<std::uint32_t>(c.b) << 16);
}

Rgb unpack(std::uint32_t v) {
    return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16)};
}

struct ScreenVertex {
    double u, v, inv_z;
};

simd::EdgeCoeffs edge(const ScreenVertex& a, const ScreenVertex& b) {
    simd::EdgeCoeffs e;
    // exactly antisymmetric under a<->b, so shared edges split pixels cleanly
    e.a = a.v - b.v;
    e.b = b.u - a.u;
    e.c = a.u * b.v - a.v * b.u;
    const double du = b.u - a.u, dv = b.v - a.v;
    e.inclusive = dv < 0.0 || (dv == 0.0 && du > 0.0);  // left or top edge
    return e;
}

int clamp_pixel(double x, int limit) {
    if (!(x > -1.0)) return -1;
    if (!(x < static_cast<double>(limit))) return limit;
    return static_cast<int>(std::floor(x));
}

/// Camera-space geometry of one entity turned into screen triangles.
class TriangleBuilder {
public:
    TriangleBuilder(const Intrinsics& K, const RenderSettings& s, const Vec3& light_cam)
        : K_(K), settings_(s), light_(light_cam) {}

    /// Returns true if any triangle needed near-plane clipping.
    bool add_entity(const Entity& e, int lod, const RigidTransform& cam_from_world,
                    std::vector<simd::TriangleSetup>& out) const {
        const Mesh& mesh = e.mesh(lod);
        const RigidTransform M = cam_from_world.compose(e.pose.to_transform());
        cam_.resize(mesh.vertices.size());
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i) cam_[i] = M.apply(mesh.vertices[i]);

        bool clipped_any = false;
        for (const auto& t : mesh.triangles) {
            const Vec3& a = cam_[t[0]];
            const Vec3& b = cam_[t[1]];
            const Vec3& c = cam_[t[2]];
            const double near = K_.near;
            if (a.z() < near && b.z() < near && c.z() < near) continue;

            const Vec3 n = (b - a).cross(c - a);
            const double len = n.norm();
            if (!(len > 0.0)) continue;
            // back faces never reach the screen; skip before clipping
            if (!(n.dot(a) < 0.0)) continue;

            Rgb color = e.color;
            if (settings_.weather != Weather::Cloudy) color = shade(e.cls, n / len, light_, e.color);

            std::array<Vec3, 4> poly;
            int count = 0;
            const bool clip = a.z() < near || b.z() < near || c.z() < near;
            if (!clip) {
                poly[0] = a;
                poly[1] = b;
                poly[2] = c;
                count = 3;
            } else {
                clipped_any = true;
                const Vec3* in[3] = {&a, &b, &c};
                for (int i = 0; i < 3; ++i) {
                    const Vec3& p = *in[i];
                    const Vec3& q = *in[(i + 1) % 3];
                    const bool p_in = p.z() >= near, q_in = q.z() >= near;
                    if (p_in) poly[count++] = p;
                    if (p_in != q_in) {
                        const double s = (near - p.z()) / (q.z() - p.z());
                        Vec3 x = p + (q - p) * s;
                        x.z() = near;
                        poly[count++] = x;
                    }
                }
            }
            ScreenVertex sv[4];
            for (int i = 0; i < count; ++i) {
                const double inv_z = 1.0 / poly[i].z();
                sv[i] = {K_.cx + K_.fx * poly[i].x() * inv_z, K_.cy + K_.fy * poly[i].y() * inv_z, inv_z};
            }
            for (int i = 1; i + 1 < count; ++i) setup(sv[0], sv[i], sv[i + 1], e.id, pack(color), out);
        }
        return clipped_any;
    }

private:
    void setup(ScreenVertex p0, ScreenVertex p1, ScreenVertex p2, std::uint32_t id, std::uint32_t color,
               std::vector<simd::TriangleSetup>& out) const {
        const double area2 = (p1.u - p0.u) * (p2.v - p0.v) - (p1.v - p0.v) * (p2.u - p0.u);
        // front faces wind negatively in y-down screen space
        if (!(area2 < 0.0)) return;
        std::swap(p1, p2);
        const double area = -area2;

        simd::TriangleSetup t;
        t.edge[0] = edge(p1, p2);
        t.edge[1] = edge(p2, p0);
        t.edge[2] = edge(p0, p1);
        t.k[0] = p0.inv_z / area;
        t.k[1] = p1.inv_z / area;
        t.k[2] = p2.inv_z / area;
        t.far = settings_.draw_distance;
        t.id = id;
        t.color = color;

        const double umin = std::min({p0.u, p1.u, p2.u}), umax = std::max({p0.u, p1.u, p2.u});
        const double vmin = std::min({p0.v, p1.v, p2.v}), vmax = std::max({p0.v, p1.v, p2.v});
        t.x_min = std::max(0, clamp_pixel(umin - 0.5, K_.width));
        t.x_max = std::min(K_.width - 1, clamp_pixel(umax - 0.5, K_.width) + 1);
        t.y_min = std::max(0, clamp_pixel(vmin - 0.5, K_.height));
        t.y_max = std::min(K_.height - 1, clamp_pixel(vmax - 0.5, K_.height) + 1);
        if (t.x_min > t.x_max || t.y_min > t.y_max) return;
        out.push_back(t);
    }

    const Intrinsics& K_;
    const RenderSettings& settings_;
    Vec3 light_;
    mutable std::vector<Vec3> cam_;
};

/// Row-major region of the image with its own z-buffer.
struct RasterTarget {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<double> depth;
    std::vector<std::uint32_t> id;
    std::vector<std::uint32_t> color;

    RasterTarget(int x, int y, int width, int height)
        : x0(x), y0(y), w(width), h(height),
          depth(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kInf),
          id(depth.size(), 0u), color(depth.size(), 0u) {}
};

void raster_rows(const std::vector<simd::TriangleSetup>& tris, RasterTarget& target, int row_begin, int row_end) {
    const auto span = simd::active_kernels().raster_span;
    const int x_lo = target.x0, x_hi = target.x0 + target.w - 1;
    for (const auto& t : tris) {
        const int yb = std::max(t.y_min, row_begin), ye = std::min(t.y_max, row_end - 1);
        const int xb = std::max(t.x_min, x_lo), xe = std::min(t.x_max, x_hi);
        if (yb > ye || xb > xe) continue;
        for (int y = yb; y <= ye; ++y) {
            const std::size_t off = static_cast<std::size_t>(y - target.y0) * static_cast<std::size_t>(target.w) +
                                    static_cast<std::size_t>(xb - target.x0);
            span(t, y, xb, xe + 1, target.depth.data() + off, target.id.data() + off, target.color.data() + off);
        }
    }
}

void raster_banded(const std::vector<simd::TriangleSetup>& tris, RasterTarget& target, int bands) {
    bands = std::clamp(bands, 1, std::max(1, target.h));
    if (bands == 1) {
        raster_rows(tris, target, target.y0, target.y0 + target.h);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(bands));
    for (int b = 0; b < bands; ++b) {
        const int rb = target.y0 + target.h * b / bands;
        const int re = target.y0 + target.h * (b + 1) / bands;
        workers.emplace_back([&tris, &target, rb, re] { raster_rows(tris, target, rb, re); });
    }
}

struct FrustumPlanes {
    std::array<Vec3, 4> side;  // unit inward normals through the camera centre
};

FrustumPlanes frustum_planes(const Intrinsics& K) {
    FrustumPlanes f;
    f.side[0] = Vec3(K.fx, 0, K.cx).normalized();
    f.side[1] = Vec3(-K.fx, 0, K.width - K.cx).normalized();
    f.side[2] = Vec3(0, K.fy, K.cy).normalized();
    f.side[3] = Vec3(0, -K.fy, K.height - K.cy).normalized();
    return f;
}

bool sphere_visible(const Vec3& c, double r, const FrustumPlanes& f, double near, double far) {
    const double slack = 1e-9 * (1.0 + r + c.norm());
    if (c.z() + r < near - slack) return false;
    if (c.z() - r > far + slack) return false;
    for (const auto& n : f.side) {
        if (n.dot(c) < -r - slack) return false;
    }
    return true;
}

std::vector<std::uint16_t> class_lookup(std::span<const Entity> entities) {
    std::uint32_t max_id = 0;
    for (const auto& e : entities) max_id = std::max(max_id, e.id);
    std::vector<std::uint16_t> lut(static_cast<std::size_t>(max_id) + 1, 0);
    for (const auto& e : entities) lut[e.id] = static_cast<std::uint16_t>(e.cls);
    return lut;
}

}  // namespace

FrameBuffers::FrameBuffers(int w, int h)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0),
      depth(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), std::numeric_limits<float>::infinity()),
      instance(depth.size(), 0u), cls(depth.size(), 0) {}

Intrinsics intrinsics_from_fov(double fov_h_deg, int width, int height) {
    if (!(fov_h_deg > 0.0 && fov_h_deg < 180.0)) {
        fail(Errc::InvalidArgument, fmt::format("field of view {} outside (0, 180)", fov_h_deg));
    }
    if (width <= 0 || height <= 0) fail(Errc::InvalidArgument, "image size must be positive");
    Intrinsics K;
    K.width = width;
    K.height = height;
    K.fx = (width / 2.0) / std::tan(deg2rad(fov_h_deg) / 2.0);
    K.fy = K.fx;
    K.cx = width / 2.0;
    K.cy = height / 2.0;
    K.near = kNearPlane;
    return K;
}

Vec2 project_point(const Intrinsics& K, const Vec3& p) {
    if (p.z() < K.near) fail(Errc::BehindCamera, fmt::format("point at z = {} is in front of the near plane", p.z()));
    return {K.cx + K.fx * p.x() / p.z(), K.cy + K.fy * p.y() / p.z()};
}

Vec3 unproject(const Intrinsics& K, double u, double v, double z) {
    return {(u - K.cx) / K.fx * z, (v - K.cy) / K.fy * z, z};
}

std::string_view weather_name(Weather w) {
    switch (w) {
        case Weather::Sunny: return "sunny";
        case Weather::Cloudy: return "cloudy";
        case Weather::Rainy: return "rainy";
        case Weather::Foggy: return "foggy";
    }
    return "sunny";
}

Weather weather_from_name(std::string_view name) {
    for (auto w : {Weather::Sunny, Weather::Cloudy, Weather::Rainy, Weather::Foggy}) {
        if (weather_name(w) == name) return w;
    }
    fail(Errc::InvalidArgument, fmt::format("unknown weather '{}'", name));
}

Vec3 sun_direction(double t) {
    double elevation = 0.0;
    if (t >= 6.0 && t <= 18.0) elevation = std::max(0.0, 90.0 * std::sin(kPi * (t - 6.0) / 12.0));
    const double tc = std::clamp(t, 6.0, 18.0);
    const double azimuth = 90.0 + 180.0 * (tc - 6.0) / 12.0;  // compass degrees, east = 90
    const double e = deg2rad(elevation), a = deg2rad(azimuth);
    return Vec3(std::sin(a) * std::cos(e), std::cos(a) * std::cos(e), std::sin(e)).normalized();
}

Rgb shade(ObjectClass cls, const Vec3& normal, const Vec3& light, Rgb base) {
    if (cls == ObjectClass::Background) return base;
    const double f = 0.3 + 0.7 * std::max(0.0, normal.dot(light));
    auto ch = [f](std::uint8_t c) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(c * f), 0L, 255L));
    };
    return {ch(base.r), ch(base.g), ch(base.b)};
}

int select_lod(double distance, double lod_near, double lod_far) {
    if (distance < lod_near) return 0;
    if (distance < lod_far) return 1;
    return 2;
}

std::vector<std::size_t> frustum_cull(std::span<const Entity> entities, const RigidTransform& camera_to_world,
                                      const Intrinsics& K, double draw_distance) {
    const RigidTransform cam_from_world = camera_to_world.inverse();
    const FrustumPlanes planes = frustum_planes(K);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const Entity& e = entities[i];
        const Mesh& m = e.mesh(0);
        const Vec3 c = cam_from_world.apply(e.pose.to_transform().apply(m.center));
        if (sphere_visible(c, m.radius, planes, K.near, draw_distance)) keep.push_back(i);
    }
    return keep;
}

namespace {

int entity_lod(const Entity& e, const Vec3& camera_position, const RenderSettings& s) {
    if (!s.lod) return 0;
    const Vec3 c = e.pose.to_transform().apply(e.mesh(0).center);
    return select_lod((c - camera_position).norm(), s.lod_near, s.lod_far);
}

}  // namespace

FrameBuffers rasterize(std::span<const Entity> entities, const RigidTransform& camera_to_world, const Intrinsics& K,
                       const RenderSettings& settings) {
    const RigidTransform cam_from_world = camera_to_world.inverse();
    const Vec3 light_cam = cam_from_world.R * sun_direction(settings.time_of_day);
    const FrustumPlanes planes = frustum_planes(K);
    TriangleBuilder builder(K, settings, light_cam);

    std::vector<simd::TriangleSetup> tris;
    for (const auto& e : entities) {
        const int lod = entity_lod(e, camera_to_world.t, settings);
        if (settings.culling) {
            const Mesh& m = e.mesh(lod);
            const Vec3 c = cam_from_world.apply(e.pose.to_transform().apply(m.center));
            if (!sphere_visible(c, m.radius, planes, K.near, settings.draw_distance)) continue;
        }
        builder.add_entity(e, lod, cam_from_world, tris);
    }

    RasterTarget target(0, 0, K.width, K.height);
    raster_banded(tris, target, settings.bands);

    FrameBuffers out(K.width, K.height);
    const auto lut = class_lookup(entities);
    const Rgb sky = sky_color(settings);
    for (std::size_t i = 0; i < target.depth.size(); ++i) {
        const std::uint32_t id = target.id[i];
        Rgb c = sky;
        if (id != 0) {
            out.depth[i] = static_cast<float>(target.depth[i]);
            out.instance[i] = id;
            out.cls[i] = lut[id];
            c = unpack(target.color[i]);
        }
        out.rgb[3 * i] = c.r;
        out.rgb[3 * i + 1] = c.g;
        out.rgb[3 * i + 2] = c.b;
    }
    return out;
}

FrameBuffers rasterize(const World& world, const RigidTransform& camera_to_world, const Intrinsics& K,
                       const RenderSettings& settings) {
    return rasterize(std::span<const Entity>(world.entities), camera_to_world, K, settings);
}

SoloCoverage render_solo(const Entity& entity, const RigidTransform& camera_to_world, const Intrinsics& K,
                         const RenderSettings& settings) {
    const RigidTransform cam_from_world = camera_to_world.inverse();
    RenderSettings flat = settings;
    flat.weather = Weather::Cloudy;  // colour is irrelevant here; skip shading
    TriangleBuilder builder(K, flat, Vec3::UnitZ());
    std::vector<simd::TriangleSetup> tris;
    SoloCoverage out;
    out.near_clipped = builder.add_entity(entity, entity_lod(entity, camera_to_world.t, settings), cam_from_world, tris);
    if (tris.empty()) return out;

    int x0 = K.width, x1 = -1, y0 = K.height, y1 = -1;
    for (const auto& t : tris) {
        x0 = std::min(x0, t.x_min);
        x1 = std::max(x1, t.x_max);
        y0 = std::min(y0, t.y_min);
        y1 = std::max(y1, t.y_max);
    }
    RasterTarget target(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
    raster_rows(tris, target, y0, y1 + 1);

    for (int y = 0; y < target.h; ++y) {
        for (int x = 0; x < target.w; ++x) {
            if (target.id[static_cast<std::size_t>(y) * static_cast<std::size_t>(target.w) + static_cast<std::size_t>(x)] == 0) continue;
            const int gx = x + x0, gy = y + y0;
            if (out.pixels == 0) {
                out.x_min = out.x_max = gx;
                out.y_min = out.y_max = gy;
            }
            ++out.pixels;
            out.x_min = std::min(out.x_min, gx);
            out.x_max = std::max(out.x_max, gx);
            out.y_min = std::min(out.y_min, gy);
            out.y_max = std::max(out.y_max, gy);
        }
    }
    return out;
}

}  // namespace peye
