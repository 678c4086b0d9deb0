#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "peye/error.hpp"
#include "peye/seed.hpp"
#include "peye/worldgen.hpp"

namespace peye {

namespace {

// seed streams
constexpr std::uint64_t kStreamVehicles = 1;
constexpr std::uint64_t kStreamColors = 2;
constexpr std::uint64_t kStreamProps = 3;
constexpr std::uint64_t kStreamSpin = 4;
constexpr std::uint64_t kStreamBuildings = 0x100000;

enum class PropKind { Tree, Fence, Sign, Light };

std::shared_ptr<const Mesh> prop_mesh(PropKind kind, int lod) {
    auto build = [](PropKind k, bool coarse) {
        Mesh m;
        switch (k) {
            case PropKind::Tree:
                m.cls = ObjectClass::Vegetation;
                if (!coarse) m.add_box({-0.15, -0.15, 0.0}, {0.15, 0.15, 2.2});
                m.add_box({-1.25, -1.25, 2.0}, {1.25, 1.25, 4.5});
                break;
            case PropKind::Fence:
                m.cls = ObjectClass::Fence;
                m.add_box({-2.0, -0.05, 0.0}, {2.0, 0.05, 1.2});
                break;
            case PropKind::Sign:
                m.cls = ObjectClass::TrafficSign;
                m.add_box({-0.05, -0.05, 0.0}, {0.05, 0.05, 2.5});
                m.add_box({-0.4, -0.06, 2.0}, {0.4, 0.06, 2.6});
                break;
            case PropKind::Light:
                m.cls = ObjectClass::TrafficLight;
                m.add_box({-0.08, -0.08, 0.0}, {0.08, 0.08, 4.0});
                m.add_box({-0.2, -0.2, 3.8}, {0.2, 0.2, 5.0});
                break;
        }
        m.update_bounds();
        return std::make_shared<const Mesh>(std::move(m));
    };
    static const std::array<std::array<std::shared_ptr<const Mesh>, 2>, 4> cache = {{
        {build(PropKind::Tree, false), build(PropKind::Tree, true)},
        {build(PropKind::Fence, false), build(PropKind::Fence, false)},
        {build(PropKind::Sign, false), build(PropKind::Sign, false)},
        {build(PropKind::Light, false), build(PropKind::Light, false)},
    }};
    return cache[static_cast<std::size_t>(kind)][lod == 0 ? 0 : 1];
}

std::shared_ptr<const Mesh> vehicle_mesh(ObjectClass cls, bool box) {
    static const std::array<std::array<std::shared_ptr<const Mesh>, 2>, 3> cache = {{
        {std::make_shared<const Mesh>(make_vehicle_mesh(ObjectClass::Car)),
         std::make_shared<const Mesh>(make_vehicle_box(ObjectClass::Car))},
        {std::make_shared<const Mesh>(make_vehicle_mesh(ObjectClass::Bus)),
         std::make_shared<const Mesh>(make_vehicle_box(ObjectClass::Bus))},
        {std::make_shared<const Mesh>(make_vehicle_mesh(ObjectClass::Truck)),
         std::make_shared<const Mesh>(make_vehicle_box(ObjectClass::Truck))},
    }};
    const std::size_t i = cls == ObjectClass::Bus ? 1 : cls == ObjectClass::Truck ? 2 : 0;
    return cache[i][box ? 1 : 0];
}

Rgb jitter(Rgb base, Rng& rng, int amount) {
    auto j = [&](std::uint8_t c) {
        const int v = c + static_cast<int>(rng.below(2 * amount + 1)) - amount;
        return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    };
    return {j(base.r), j(base.g), j(base.b)};
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (a + ab * t - p).norm();
}

bool inside_other_road(const std::vector<RoadSpec>& roads, std::size_t self, const Vec2& p) {
    for (std::size_t r = 0; r < roads.size(); ++r) {
        if (r == self) continue;
        const auto& c = roads[r].centerline;
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            if (point_segment_distance(p, c[i], c[i + 1]) < 0.5 * roads[r].width + 1.5) return true;
        }
    }
    return false;
}

std::shared_ptr<const Mesh> shared(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

Pose agent_pose(const World& w, const VehicleAgent& a, double yaw_override, bool use_override) {
    const LanePoint lp = lane_point(w.roads[a.lane.road], a.lane.lane, a.arc_position);
    Pose p;
    p.position = Vec3(lp.position.x(), lp.position.y(), 0.0);
    p.yaw = use_override ? yaw_override : std::atan2(lp.tangent.y(), lp.tangent.x());
    return p;
}

}  // namespace

std::optional<ScenarioPreset> preset_by_name(const std::string& name) {
    ScenarioPreset p;
    p.name = name;
    if (name == "PE01") {
        p.yaw_offsets = {0.0, deg2rad(15), deg2rad(-15), deg2rad(30), deg2rad(-30)};
        p.density = TrafficDensity::Sparse;
        p.draw_distance = 300.0;
    } else if (name == "PE02") {
        p.yaw_offsets = {deg2rad(90), deg2rad(-90)};
        p.density = TrafficDensity::Sparse;
        p.rotate_vehicles = true;
        p.draw_distance = 150.0;
    } else if (name == "PE03") {
        p.yaw_offsets = {0.0};
        p.density = TrafficDensity::Dense;
        p.per_frame_color_change = true;
        p.draw_distance = 150.0;
    } else {
        return std::nullopt;
    }
    return p;
}

Rgb vehicle_color(std::uint64_t seed, std::uint32_t id) {
    Rng rng(derive_seed(seed, id));
    const auto v = rng.next();
    return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16)};
}

const Entity* World::find(std::uint32_t id) const {
    // ids are assigned densely from 1 in construction order
    if (id >= 1 && id <= entities.size() && entities[id - 1].id == id) return &entities[id - 1];
    for (const auto& e : entities) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

World build_world(const Layout& layout, const ScenarioPreset& preset, CameraRig rig, std::uint64_t seed,
                  const WorldOptions& options) {
    if (layout.roads.empty()) fail(Errc::InvalidArgument, "layout has no roads");
    if (!(rig.fov_h > 0 && rig.fov_h < 180)) fail(Errc::InvalidArgument, "fov_h must be in (0, 180)");
    if (rig.width < 16 || rig.height < 16) fail(Errc::InvalidArgument, "resolution must be at least 16x16");

    World w;
    w.roads = layout.roads;
    w.preset = preset;
    rig.yaw_offsets = preset.yaw_offsets;
    rig.draw_distance = preset.draw_distance;
    if (!(rig.draw_distance > 0)) fail(Errc::InvalidArgument, "draw_distance must be > 0");
    if (rig.yaw_offsets.empty()) fail(Errc::InvalidArgument, "at least one yaw offset is required");
    w.rig = rig;
    w.dt = options.dt;
    w.seed = seed;

    auto add_entity = [&](ObjectClass cls, std::array<std::shared_ptr<const Mesh>, 3> lods, Pose pose, Rgb color) {
        Entity e;
        e.id = static_cast<std::uint32_t>(w.entities.size() + 1);
        e.cls = cls;
        e.lods = std::move(lods);
        e.pose = pose;
        e.color = color;
        w.entities.push_back(std::move(e));
        return w.entities.size() - 1;
    };
    auto same_lods = [](std::shared_ptr<const Mesh> m) { return std::array{m, m, m}; };

    Rng color_rng(derive_seed(seed, kStreamColors));

    // ground: one quad well past the furthest draw distance
    {
        Vec2 lo = layout.roads.front().centerline.front(), hi = lo;
        for (const auto& r : layout.roads) {
            for (const auto& p : r.centerline) {
                lo = lo.cwiseMin(p);
                hi = hi.cwiseMax(p);
            }
        }
        for (const auto& f : layout.footprints) {
            for (const auto& p : f.polygon) {
                lo = lo.cwiseMin(p);
                hi = hi.cwiseMax(p);
            }
        }
        const double margin = 400.0;
        constexpr double kGroundZ = -0.02;  // just under the road surface
        Mesh g;
        g.cls = ObjectClass::Ground;
        g.vertices = {{lo.x() - margin, lo.y() - margin, kGroundZ},
                      {hi.x() + margin, lo.y() - margin, kGroundZ},
                      {hi.x() + margin, hi.y() + margin, kGroundZ},
                      {lo.x() - margin, hi.y() + margin, kGroundZ}};
        g.triangles = {{0, 1, 2}, {0, 2, 3}};
        g.update_bounds();
        add_entity(ObjectClass::Ground, same_lods(shared(std::move(g))), {}, {96, 112, 80});
    }

    for (const auto& road : layout.roads) {
        add_entity(ObjectClass::Road, same_lods(shared(tessellate_road(road))), {}, jitter({88, 88, 92}, color_rng, 4));
    }

    for (std::size_t i = 0; i < layout.footprints.size(); ++i) {
        const auto& fp = layout.footprints[i];
        double height = 0.0;
        if (auto it = fp.tags.find("height"); it != fp.tags.end()) {
            try {
                height = std::stod(it->second);
            } catch (const std::exception&) {
                height = 0.0;
            }
        }
        if (!(height > 0)) height = building_height(fp.tags, derive_seed(seed, kStreamBuildings + i));
        try {
            auto mesh = shared(extrude_footprint(fp, height));
            add_entity(ObjectClass::Building, same_lods(mesh), {}, jitter({150, 140, 130}, color_rng, 30));
        } catch (const Error& e) {
            w.warnings.push_back(fmt::format("footprint {}: {}", i, e.what()));
        }
    }

    // roadside props every 20 m with +-3 m jitter on both sides
    Rng prop_rng(derive_seed(seed, kStreamProps));
    for (std::size_t r = 0; r < w.roads.size(); ++r) {
        const RoadSpec& road = w.roads[r];
        const double length = road.length();
        for (int side : {1, -1}) {
            for (double base = 10.0; base < length; base += 20.0) {
                const double s = std::clamp(base + prop_rng.uniform(-3.0, 3.0), 0.0, std::nextafter(length, 0.0));
                const auto roll = prop_rng.below(20);
                const PropKind kind = roll < 10 ? PropKind::Tree
                                      : roll < 14 ? PropKind::Fence
                                      : roll < 17 ? PropKind::Sign
                                                  : PropKind::Light;
                const LanePoint lp = lane_point(RoadSpec{road.centerline, road.width, 1}, 0, s);
                const Vec2 left(-lp.tangent.y(), lp.tangent.x());
                const Vec2 pos = lp.position + left * (side * (0.5 * road.width + 2.0));
                if (inside_other_road(w.roads, r, pos)) continue;
                Pose pose;
                pose.position = Vec3(pos.x(), pos.y(), 0.0);
                pose.yaw = std::atan2(lp.tangent.y(), lp.tangent.x());
                const auto l0 = prop_mesh(kind, 0), l1 = prop_mesh(kind, 1);
                static constexpr Rgb kPropColors[] = {{60, 120, 50}, {170, 150, 120}, {200, 200, 40}, {60, 60, 60}};
                add_entity(l0->cls, {l0, l1, l1}, pose, jitter(kPropColors[static_cast<int>(kind)], prop_rng, 12));
            }
        }
    }

    // ego on the right-most lane of the longest road
    std::size_t ego_road = 0;
    for (std::size_t r = 1; r < w.roads.size(); ++r) {
        if (w.roads[r].length() > w.roads[ego_road].length()) ego_road = r;
    }
    w.ego.lane = {ego_road, 0};
    w.ego.arc_position = 0.0;
    w.ego.speed = options.ego_speed;

    w.agents = place_vehicles(w.roads, preset.density, derive_seed(seed, kStreamVehicles), w.ego.lane, &w.warnings);
    Rng spin_rng(derive_seed(seed, kStreamSpin));
    for (auto& a : w.agents) {
        double yaw = 0.0;
        if (preset.rotate_vehicles) {
            a.behavior = Behavior::RotateInPlace;
            a.speed = 0.0;
            const double magnitude = spin_rng.uniform(0.3, 1.0);
            a.spin_rate = spin_rng.below(2) ? magnitude : -magnitude;
            yaw = spin_rng.uniform(0.0, 2.0 * kPi);
        }
        const Pose pose = agent_pose(w, a, yaw, preset.rotate_vehicles);
        const auto id = static_cast<std::uint32_t>(w.entities.size() + 1);
        const Rgb color = preset.per_frame_color_change ? vehicle_color(frame_seed(seed, 0), id)
                                                        : vehicle_color(derive_seed(seed, kStreamColors), id);
        const auto full = vehicle_mesh(a.cls, false), box = vehicle_mesh(a.cls, true);
        a.entity = add_entity(a.cls, {full, full, box}, pose, color);
    }

    if (w.entities.size() > 65535) {
        fail(Errc::InvalidArgument,
             fmt::format("{} entities exceed the 16-bit instance id range", w.entities.size()));
    }
    return w;
}

World step(const World& world, double dt) {
    if (!(dt > 0)) fail(Errc::InvalidArgument, "step: dt must be > 0");
    World w = world;
    for (auto& a : w.agents) {
        Entity& e = w.entities[a.entity];
        if (a.behavior == Behavior::FollowLane) {
            const double length = w.roads[a.lane.road].length();
            a.arc_position = std::fmod(a.arc_position + a.speed * dt, length);
            e.pose = agent_pose(w, a, 0.0, false);
        } else {
            e.pose.yaw += a.spin_rate * dt;
        }
    }
    const double ego_len = w.roads[w.ego.lane.road].length();
    w.ego.arc_position = std::fmod(w.ego.arc_position + w.ego.speed * dt, ego_len);
    w.frame += 1;
    if (w.preset.per_frame_color_change) {
        const std::uint64_t fs = frame_seed(w.seed, w.frame);
        for (const auto& a : w.agents) {
            Entity& e = w.entities[a.entity];
            e.color = vehicle_color(fs, e.id);
        }
    }
    return w;
}

Pose ego_pose(const World& world) {
    const LanePoint lp = lane_point(world.roads[world.ego.lane.road], world.ego.lane.lane, world.ego.arc_position);
    Pose p;
    p.position = Vec3(lp.position.x(), lp.position.y(), 0.0);
    p.yaw = std::atan2(lp.tangent.y(), lp.tangent.x());
    return p;
}

RigidTransform camera_from_heading(const Vec3& position, double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    RigidTransform T;
    // columns: camera x (right), y (down), z (forward) in world coordinates
    T.R << s, 0, c,
          -c, 0, s,
           0, -1, 0;
    T.t = position;
    return T;
}

RigidTransform camera_pose(const CameraRig& rig, const World& world, std::size_t yaw_offset_index) {
    if (yaw_offset_index >= rig.yaw_offsets.size()) {
        fail(Errc::InvalidArgument, fmt::format("yaw offset index {} out of range", yaw_offset_index));
    }
    const Pose ego = ego_pose(world);
    return camera_from_heading(ego.position + Vec3(0, 0, rig.mount_height), ego.yaw + rig.yaw_offsets[yaw_offset_index]);
}

std::string world_manifest_json(const World& world) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (std::size_t c = 1; c < kClassCount; ++c) counts[std::string(class_name(static_cast<ObjectClass>(c)))] = 0;
    for (const auto& e : world.entities) counts[std::string(class_name(e.cls))] = counts[std::string(class_name(e.cls))].get<int>() + 1;
    double lane_length = 0.0;
    for (const auto& r : world.roads) lane_length += r.length() * r.lane_count;
    j["preset"] = world.preset.name;
    j["seed"] = world.seed;
    j["frame"] = world.frame;
    j["entity_count"] = world.entities.size();
    j["entity_counts"] = counts;
    j["agent_count"] = world.agents.size();
    j["total_lane_length"] = lane_length;
    return j.dump(2);
}

std::string serialize_world(const World& world) {
    nlohmann::ordered_json j;
    j["frame"] = world.frame;
    j["seed"] = world.seed;
    j["ego"] = {world.ego.lane.road, world.ego.lane.lane, world.ego.arc_position, world.ego.speed};
    auto& ents = j["entities"] = nlohmann::ordered_json::array();
    for (const auto& e : world.entities) {
        nlohmann::ordered_json je;
        je["id"] = e.id;
        je["class"] = class_name(e.cls);
        je["pose"] = {e.pose.position.x(), e.pose.position.y(), e.pose.position.z(), e.pose.yaw};
        je["color"] = {e.color.r, e.color.g, e.color.b};
        const Mesh& m = e.mesh(0);
        auto& verts = je["vertices"] = nlohmann::ordered_json::array();
        for (const auto& v : m.vertices) verts.push_back({v.x(), v.y(), v.z()});
        auto& tris = je["triangles"] = nlohmann::ordered_json::array();
        for (const auto& t : m.triangles) tris.push_back({t[0], t[1], t[2]});
        ents.push_back(std::move(je));
    }
    auto& agents = j["agents"] = nlohmann::ordered_json::array();
    for (const auto& a : world.agents) {
        agents.push_back({a.entity, class_name(a.cls), a.lane.road, a.lane.lane, a.arc_position, a.speed,
                          a.behavior == Behavior::FollowLane ? "follow_lane" : "rotate_in_place", a.spin_rate});
    }
    return j.dump();
}

Layout synthetic_city(const CityOptions& o, std::uint64_t seed) {
    Layout layout;
    const double B = o.block_size;
    const double W = o.blocks_x * B, H = o.blocks_y * B;
    for (int j = 0; j <= o.blocks_y; ++j) {
        layout.roads.push_back({{Vec2(0.0, j * B), Vec2(W, j * B)}, o.road_width, o.lanes});
    }
    for (int i = 0; i <= o.blocks_x; ++i) {
        layout.roads.push_back({{Vec2(i * B, 0.0), Vec2(i * B, H)}, o.road_width, o.lanes});
    }

    Rng rng(derive_seed(seed, 0xC17E));
    const double margin = 0.5 * o.road_width + 6.0;
    const double inner = B - 2.0 * margin;
    const double lot = 0.5 * (inner - 4.0);
    for (int bx = 0; bx < o.blocks_x; ++bx) {
        for (int by = 0; by < o.blocks_y; ++by) {
            for (int lx = 0; lx < 2; ++lx) {
                for (int ly = 0; ly < 2; ++ly) {
                    const double x0 = bx * B + margin + lx * (lot + 4.0);
                    const double y0 = by * B + margin + ly * (lot + 4.0);
                    const double inset = rng.uniform(0.0, 0.2 * lot);
                    const double ax = x0 + inset, ay = y0 + inset;
                    const double bxe = x0 + lot - rng.uniform(0.0, 0.2 * lot);
                    const double bye = y0 + lot - rng.uniform(0.0, 0.2 * lot);
                    FootprintSpec fp;
                    if (rng.below(3) == 0) {
                        const double cx = ax + 0.5 * (bxe - ax), cy = ay + 0.5 * (bye - ay);
                        fp.polygon = {{ax, ay}, {bxe, ay}, {bxe, cy}, {cx, cy}, {cx, bye}, {ax, bye}};
                    } else {
                        fp.polygon = {{ax, ay}, {bxe, ay}, {bxe, bye}, {ax, bye}};
                    }
                    fp.tags["building"] = "yes";
                    if (rng.below(2) == 0) fp.tags["building:levels"] = std::to_string(2 + rng.below(9));
                    layout.footprints.push_back(std::move(fp));
                }
            }
        }
    }
    return layout;
}

}  // namespace peye
