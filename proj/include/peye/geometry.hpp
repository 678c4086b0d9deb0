#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace peye {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/// Rigid transform p' = R p + t.
struct RigidTransform {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return R * p + t; }
    RigidTransform inverse() const {
        RigidTransform inv;
        inv.R = R.transpose();
        inv.t = -(inv.R * t);
        return inv;
    }
    /// (this ∘ other)(p) = this(other(p))
    RigidTransform compose(const RigidTransform& other) const {
        return {R * other.R, R * other.t + t};
    }
};

/// Ground-vehicle pose: translation plus heading about world +z.
struct Pose {
    Vec3 position = Vec3::Zero();
    double yaw = 0.0;

    RigidTransform to_transform() const;
    friend bool operator==(const Pose& a, const Pose& b) {
        return a.position == b.position && a.yaw == b.yaw;
    }
};

Mat3 yaw_rotation(double yaw);

/// Shoelace signed area; positive for counter-clockwise rings.
/// The ring is implicitly closed (last point connects back to first).
double signed_area(std::span<const Vec2> ring);

/// Closed-segment intersection test, including collinear overlap and touching.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// All-pairs test over non-adjacent edges. Requires >= 3 points.
bool is_simple_polygon(std::span<const Vec2> ring);

/// Ear-clipping triangulation of a simple CCW polygon. Returns n-2 index
/// triples into `ring`, or nullopt if no ear can be found.
std::optional<std::vector<std::array<std::uint32_t, 3>>> ear_clip(std::span<const Vec2> ring);

/// Drops vertices that are collinear with their neighbours.
std::vector<Vec2> remove_collinear(std::span<const Vec2> ring);

}  // namespace peye
