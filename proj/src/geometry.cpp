#include "peye/geometry.hpp"

#include <cmath>

namespace peye {

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

Mat3 yaw_rotation(double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    Mat3 R;
    R << c, -s, 0, s, c, 0, 0, 0, 1;
    return R;
}

RigidTransform Pose::to_transform() const { return {yaw_rotation(yaw), position}; }

double signed_area(std::span<const Vec2> ring) {
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2& p = ring[i];
        const Vec2& q = ring[(i + 1) % ring.size()];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * twice;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const int d1 = sign(cross2(c, d, a));
    const int d2 = sign(cross2(c, d, b));
    const int d3 = sign(cross2(a, b, c));
    const int d4 = sign(cross2(a, b, d));
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && on_segment(c, d, a)) return true;
    if (d2 == 0 && on_segment(c, d, b)) return true;
    if (d3 == 0 && on_segment(a, b, c)) return true;
    if (d4 == 0 && on_segment(a, b, d)) return true;
    return false;
}

bool is_simple_polygon(std::span<const Vec2> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        if (a == b) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            // adjacent edges share exactly one endpoint
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(a, b, ring[j], ring[(j + 1) % n])) return false;
        }
    }
    return true;
}

std::vector<Vec2> remove_collinear(std::span<const Vec2> ring) {
    std::vector<Vec2> out(ring.begin(), ring.end());
    bool changed = true;
    while (changed && out.size() > 3) {
        changed = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Vec2& prev = out[(i + out.size() - 1) % out.size()];
            const Vec2& next = out[(i + 1) % out.size()];
            if (cross2(prev, out[i], next) == 0.0) {
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    return out;
}

std::optional<std::vector<std::array<std::uint32_t, 3>>> ear_clip(std::span<const Vec2> ring) {
    const std::size_t n = ring.size();
    std::vector<std::array<std::uint32_t, 3>> tris;
    if (n < 3) return std::nullopt;
    tris.reserve(n - 2);

    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);

    auto inside_or_on = [&](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
        return cross2(a, b, p) >= 0 && cross2(b, c, p) >= 0 && cross2(c, a, p) >= 0;
    };

    while (idx.size() > 3) {
        bool clipped = false;
        const std::size_t m = idx.size();
        for (std::size_t i = 0; i < m; ++i) {
            const std::uint32_t ip = idx[(i + m - 1) % m], ic = idx[i], in = idx[(i + 1) % m];
            const Vec2 &a = ring[ip], &b = ring[ic], &c = ring[in];
            if (cross2(a, b, c) <= 0) continue;  // reflex or flat tip
            bool blocked = false;
            for (std::size_t k = 0; k < m && !blocked; ++k) {
                const std::uint32_t q = idx[k];
                if (q == ip || q == ic || q == in) continue;
                if (ring[q] == a || ring[q] == b || ring[q] == c) continue;
                blocked = inside_or_on(a, b, c, ring[q]);
            }
            if (blocked) continue;
            tris.push_back({ip, ic, in});
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
            clipped = true;
            break;
        }
        if (!clipped) return std::nullopt;
    }
    if (cross2(ring[idx[0]], ring[idx[1]], ring[idx[2]]) <= 0) return std::nullopt;
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

}  // namespace peye
