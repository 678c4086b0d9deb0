#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "peye/classes.hpp"
#include "peye/geometry.hpp"
#include "peye/mapio.hpp"

namespace peye {

using Triangle = std::array<std::uint32_t, 3>;

/// Triangle mesh. Winding is counter-clockwise seen from outside, so the
/// geometric normal (v1-v0)x(v2-v0) points outward.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    ObjectClass cls = ObjectClass::Background;
    std::uint32_t instance_id = 0;

    // bounding sphere in mesh coordinates, see update_bounds()
    Vec3 center = Vec3::Zero();
    double radius = 0.0;

    void update_bounds();
    /// Appends an axis-aligned box [lo, hi] with outward-facing triangles.
    void add_box(const Vec3& lo, const Vec3& hi);
    double triangle_area(std::size_t i) const;
};

/// Side walls plus an ear-clipped roof: 2n + (n-2) triangles for an n-gon.
/// Throws Error(TriangulationFailure) when the roof cannot be triangulated.
Mesh extrude_footprint(const FootprintSpec& fp, double height);

/// 3 m per `building:levels` when that tag holds an integer >= 1, otherwise a
/// seeded uniform draw in [6, 30] m.
double building_height(const TagMap& tags, std::uint64_t seed);

/// Miter-joined quad strip at z = 0, two triangles per centerline segment.
Mesh tessellate_road(const RoadSpec& road);

struct VehicleDims {
    double length, width, height;
};
VehicleDims vehicle_dimensions(ObjectClass cls);

/// Body box plus cabin/cargo box, origin at the footprint centre on the ground,
/// facing +x.
Mesh make_vehicle_mesh(ObjectClass cls);
/// Single bounding box of the vehicle; used as the coarsest LOD.
Mesh make_vehicle_box(ObjectClass cls);

enum class TrafficDensity { Sparse, Dense };
enum class Behavior { FollowLane, RotateInPlace };

struct LaneRef {
    std::size_t road = 0;
    int lane = 0;
    friend bool operator==(const LaneRef&, const LaneRef&) = default;
};

struct LanePoint {
    Vec2 position;
    Vec2 tangent;  ///< unit length
};

/// Arc-length point on the centerline, offset laterally to the lane centre.
/// Lane 0 is the right-most lane. `s` wraps modulo the lane length.
LanePoint lane_point(const RoadSpec& road, int lane_index, double s);
double lane_offset(const RoadSpec& road, int lane_index);

struct VehicleAgent {
    std::size_t entity = 0;  ///< index into World::entities
    ObjectClass cls = ObjectClass::Car;
    LaneRef lane;
    double arc_position = 0.0;
    double speed = 0.0;
    Behavior behavior = Behavior::FollowLane;
    double spin_rate = 0.0;
};

inline constexpr double kSparseMinGap = 8.0;
inline constexpr double kSparseMaxGap = 24.0;
inline constexpr double kDenseMinGap = 0.5;
inline constexpr double kDenseMaxGap = 2.0;

/// Fills every lane of every road (except `reserved`) with vehicles, bumper
/// gaps drawn per density, classes mixed car:bus:truck = 3:1:1, one speed per
/// lane in [5, 15] m/s. `entity` fields are left for the caller to assign.
/// Lanes too short for a vehicle are skipped and reported in `skipped`.
std::vector<VehicleAgent> place_vehicles(const std::vector<RoadSpec>& roads, TrafficDensity density,
                                         std::uint64_t seed,
                                         std::optional<LaneRef> reserved = std::nullopt,
                                         std::vector<std::string>* skipped = nullptr);

struct Entity {
    std::uint32_t id = 0;
    ObjectClass cls = ObjectClass::Background;
    /// Geometry per level of detail; levels may share one mesh.
    std::array<std::shared_ptr<const Mesh>, 3> lods;
    Pose pose;
    Rgb color;

    const Mesh& mesh(int lod = 0) const { return *lods[static_cast<std::size_t>(lod)]; }
};

struct EgoState {
    LaneRef lane;
    double arc_position = 0.0;
    double speed = 8.0;
};

struct CameraRig {
    double mount_height = 1.5;
    std::vector<double> yaw_offsets{0.0};  ///< radians
    double fov_h = 60.0;                   ///< degrees
    int width = 640;
    int height = 480;
    double draw_distance = 150.0;
};

struct ScenarioPreset {
    std::string name = "custom";
    std::vector<double> yaw_offsets{0.0};  ///< radians
    TrafficDensity density = TrafficDensity::Sparse;
    bool per_frame_color_change = false;
    bool rotate_vehicles = false;
    double draw_distance = 150.0;
};

/// PE01, PE02 or PE03; nullopt for unknown names.
std::optional<ScenarioPreset> preset_by_name(const std::string& name);

struct WorldOptions {
    double ego_speed = 8.0;
    double dt = 0.1;
};

struct World {
    std::vector<Entity> entities;
    std::vector<RoadSpec> roads;
    std::vector<VehicleAgent> agents;
    EgoState ego;
    CameraRig rig;
    ScenarioPreset preset;
    std::uint64_t frame = 0;
    double dt = 0.1;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    const Entity* find(std::uint32_t id) const;
};

/// Static city (ground, roads, buildings, props) plus vehicles and the ego rig.
/// Deterministic in (layout, preset, rig, seed).
World build_world(const Layout& layout, const ScenarioPreset& preset, CameraRig rig,
                  std::uint64_t seed, const WorldOptions& options = {});

/// Advances agents, ego and clock by dt. Throws Error(InvalidArgument) if dt <= 0.
World step(const World& world, double dt);

Pose ego_pose(const World& world);

/// Camera-to-world transform. Camera frame is x-right, y-down, z-forward.
RigidTransform camera_pose(const CameraRig& rig, const World& world, std::size_t yaw_offset_index);
RigidTransform camera_from_heading(const Vec3& position, double yaw);

Rgb vehicle_color(std::uint64_t seed, std::uint32_t id);

/// Entity counts per class and total lane length.
std::string world_manifest_json(const World& world);
/// Full dump (geometry, poses, colors, agents). Used for determinism checks.
std::string serialize_world(const World& world);

struct CityOptions {
    int blocks_x = 4;
    int blocks_y = 3;
    double block_size = 120.0;
    double road_width = 12.0;
    int lanes = 4;
};

/// Grid city used when no map is supplied.
Layout synthetic_city(const CityOptions& options, std::uint64_t seed);

}  // namespace peye
