#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "peye/error.hpp"
#include "peye/seed.hpp"
#include "peye/worldgen.hpp"

namespace peye {

void Mesh::update_bounds() {
    if (vertices.empty()) {
        center = Vec3::Zero();
        radius = 0.0;
        return;
    }
    Vec3 lo = vertices.front(), hi = vertices.front();
    for (const auto& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    center = 0.5 * (lo + hi);
    radius = 0.0;
    for (const auto& v : vertices) radius = std::max(radius, (v - center).norm());
}

void Mesh::add_box(const Vec3& lo, const Vec3& hi) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    for (int i = 0; i < 8; ++i) {
        vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                              (i & 4) ? hi.z() : lo.z());
    }
    // corner index = x | y<<1 | z<<2; quads listed CCW seen from outside
    static constexpr std::array<std::array<std::uint32_t, 4>, 6> kFaces = {{
        {4, 5, 7, 6},  // +z
        {0, 2, 3, 1},  // -z
        {1, 3, 7, 5},  // +x
        {0, 4, 6, 2},  // -x
        {2, 6, 7, 3},  // +y
        {0, 1, 5, 4},  // -y
    }};
    for (const auto& f : kFaces) {
        triangles.push_back({base + f[0], base + f[1], base + f[2]});
        triangles.push_back({base + f[0], base + f[2], base + f[3]});
    }
}

double Mesh::triangle_area(std::size_t i) const {
    const auto& t = triangles[i];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

Mesh extrude_footprint(const FootprintSpec& fp, double height) {
    if (!(height > 0)) fail(Errc::InvalidArgument, "extrusion height must be > 0");
    const auto& ring = fp.polygon;
    const auto n = static_cast<std::uint32_t>(ring.size());
    auto roof = ear_clip(ring);
    if (!roof) fail(Errc::TriangulationFailure, fmt::format("cannot triangulate {}-gon roof", n));

    Mesh mesh;
    mesh.cls = ObjectClass::Building;
    mesh.vertices.reserve(2 * n);
    for (const auto& p : ring) mesh.vertices.emplace_back(p.x(), p.y(), 0.0);
    for (const auto& p : ring) mesh.vertices.emplace_back(p.x(), p.y(), height);

    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t j = (i + 1) % n;
        mesh.triangles.push_back({i, j, n + j});
        mesh.triangles.push_back({i, n + j, n + i});
    }
    for (const auto& t : *roof) mesh.triangles.push_back({n + t[0], n + t[1], n + t[2]});
    mesh.update_bounds();
    return mesh;
}

double building_height(const TagMap& tags, std::uint64_t seed) {
    if (auto it = tags.find("building:levels"); it != tags.end()) {
        try {
            std::size_t used = 0;
            const long levels = std::stol(it->second, &used);
            if (used == it->second.size() && levels >= 1) return 3.0 * static_cast<double>(levels);
        } catch (const std::exception&) {
        }
    }
    Rng rng(mix64(seed));
    return rng.uniform(6.0, 30.0);
}

Mesh tessellate_road(const RoadSpec& road) {
    const auto& c = road.centerline;
    const std::size_t n = c.size();
    const double half = 0.5 * road.width;
    Mesh mesh;
    mesh.cls = ObjectClass::Road;
    if (n < 2) return mesh;

    auto left_normal = [&](std::size_t seg) {
        const Vec2 d = (c[seg + 1] - c[seg]).normalized();
        return Vec2(-d.y(), d.x());
    };

    mesh.vertices.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 offset;
        if (i == 0) {
            offset = left_normal(0) * half;
        } else if (i == n - 1) {
            offset = left_normal(n - 2) * half;
        } else {
            const Vec2 a = left_normal(i - 1), b = left_normal(i);
            const Vec2 sum = a + b;
            if (sum.norm() < 1e-12) {
                offset = a * half;
            } else {
                const Vec2 m = sum.normalized();
                // miter length grows without bound at hairpins; cap it
                const double len = std::min(half / m.dot(a), 4.0 * half);
                offset = m * len;
            }
        }
        const Vec2 r = c[i] - offset, l = c[i] + offset;
        mesh.vertices.emplace_back(r.x(), r.y(), 0.0);  // 2i: right edge
        mesh.vertices.emplace_back(l.x(), l.y(), 0.0);  // 2i+1: left edge
    }
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
        const std::uint32_t r0 = 2 * i, l0 = 2 * i + 1, r1 = 2 * i + 2, l1 = 2 * i + 3;
        mesh.triangles.push_back({r0, r1, l1});
        mesh.triangles.push_back({r0, l1, l0});
    }
    mesh.update_bounds();
    return mesh;
}

VehicleDims vehicle_dimensions(ObjectClass cls) {
    switch (cls) {
        case ObjectClass::Bus: return {12.0, 2.5, 3.0};
        case ObjectClass::Truck: return {8.0, 2.5, 3.2};
        default: return {4.5, 1.8, 1.5};
    }
}

Mesh make_vehicle_mesh(ObjectClass cls) {
    Mesh m;
    m.cls = cls;
    switch (cls) {
        case ObjectClass::Bus:
            m.add_box({-6.0, -1.25, 0.0}, {6.0, 1.25, 1.0});
            m.add_box({-5.8, -1.2, 1.0}, {5.8, 1.2, 3.0});
            break;
        case ObjectClass::Truck:
            m.add_box({2.2, -1.2, 0.0}, {4.0, 1.2, 2.6});    // cab
            m.add_box({-4.0, -1.25, 0.0}, {2.0, 1.25, 3.2});  // cargo
            break;
        default:
            m.add_box({-2.25, -0.9, 0.0}, {2.25, 0.9, 0.85});
            m.add_box({-1.3, -0.8, 0.85}, {1.0, 0.8, 1.5});
            break;
    }
    m.update_bounds();
    return m;
}

Mesh make_vehicle_box(ObjectClass cls) {
    const auto d = vehicle_dimensions(cls);
    Mesh m;
    m.cls = cls;
    m.add_box({-0.5 * d.length, -0.5 * d.width, 0.0}, {0.5 * d.length, 0.5 * d.width, d.height});
    m.update_bounds();
    return m;
}

}  // namespace peye
