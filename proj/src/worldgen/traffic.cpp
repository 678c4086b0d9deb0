#include <fmt/format.h>

#include <cmath>

#include "peye/seed.hpp"
#include "peye/worldgen.hpp"

namespace peye {

double lane_offset(const RoadSpec& road, int lane_index) {
    const double lane_width = road.width / road.lane_count;
    return (lane_index + 0.5) * lane_width - 0.5 * road.width;
}

LanePoint lane_point(const RoadSpec& road, int lane_index, double s) {
    const auto& c = road.centerline;
    const double total = road.length();
    s = std::fmod(s, total);
    if (s < 0) s += total;

    std::size_t seg = 0;
    double start = 0.0;
    for (; seg + 2 < c.size(); ++seg) {
        const double len = (c[seg + 1] - c[seg]).norm();
        if (s < start + len) break;
        start += len;
    }
    const Vec2 d = c[seg + 1] - c[seg];
    const double len = d.norm();
    const Vec2 tangent = d / len;
    const Vec2 left(-tangent.y(), tangent.x());
    const double t = (s - start) / len;
    return {c[seg] + d * t + left * lane_offset(road, lane_index), tangent};
}

namespace {

ObjectClass draw_class(Rng& rng) {
    const auto k = rng.below(5);  // car:bus:truck = 3:1:1
    if (k < 3) return ObjectClass::Car;
    return k == 3 ? ObjectClass::Bus : ObjectClass::Truck;
}

}  // namespace

std::vector<VehicleAgent> place_vehicles(const std::vector<RoadSpec>& roads, TrafficDensity density,
                                         std::uint64_t seed, std::optional<LaneRef> reserved,
                                         std::vector<std::string>* skipped) {
    const bool dense = density == TrafficDensity::Dense;
    const double min_gap = dense ? kDenseMinGap : kSparseMinGap;
    const double max_gap = dense ? kDenseMaxGap : kSparseMaxGap;

    std::vector<VehicleAgent> agents;
    for (std::size_t r = 0; r < roads.size(); ++r) {
        const double length = roads[r].length();
        for (int lane = 0; lane < roads[r].lane_count; ++lane) {
            if (reserved && reserved->road == r && reserved->lane == lane) continue;
            Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(r) << 16) | static_cast<unsigned>(lane)));
            const double speed = rng.uniform(5.0, 15.0);
            const double first_rear = rng.uniform(0.0, max_gap);
            double rear = first_rear;
            bool placed_any = false;
            for (;;) {
                const ObjectClass cls = draw_class(rng);
                const double len = vehicle_dimensions(cls).length;
                // the gap back to the first vehicle across the wrap seam counts too
                if (rear + len + min_gap > first_rear + length) {
                    if (!placed_any && skipped && length < len) {
                        skipped->push_back(fmt::format("NoRoadSpace: road {} lane {} is {:.2f} m", r, lane, length));
                    }
                    break;
                }
                VehicleAgent a;
                a.cls = cls;
                a.lane = {r, lane};
                a.arc_position = std::fmod(rear + 0.5 * len, length);
                a.speed = speed;
                agents.push_back(a);
                placed_any = true;
                rear += len + rng.uniform(min_gap, max_gap);
            }
        }
    }
    return agents;
}

}  // namespace peye
