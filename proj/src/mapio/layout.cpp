#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "peye/error.hpp"
#include "peye/mapio.hpp"

namespace peye {

double RoadSpec::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < centerline.size(); ++i) {
        total += (centerline[i] - centerline[i - 1]).norm();
    }
    return total;
}

double road_width_for(const TagMap& tags) {
    auto it = tags.find("highway");
    if (it == tags.end()) return 6.0;
    if (it->second == "motorway") return 12.0;
    if (it->second == "primary") return 9.0;
    return 6.0;  // residential and everything else
}

int lane_count_for(const TagMap& tags, double width) {
    if (auto it = tags.find("lanes"); it != tags.end()) {
        try {
            std::size_t used = 0;
            const int n = std::stoi(it->second, &used);
            if (used == it->second.size() && n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1, static_cast<int>(std::lround(width / 3.0)));
}

std::vector<Vec2> normalize_footprint(std::vector<Vec2> ring) {
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() < 3) fail(Errc::DegenerateGeometry, "footprint has fewer than 3 distinct vertices");
    ring = remove_collinear(ring);
    const double area = signed_area(ring);
    if (ring.size() < 3 || area == 0.0) fail(Errc::DegenerateGeometry, "footprint has zero area");
    if (!is_simple_polygon(ring)) fail(Errc::DegenerateGeometry, "footprint self-intersects");
    if (area < 0) std::reverse(ring.begin(), ring.end());
    return ring;
}

namespace {

std::vector<Vec2> dedupe_polyline(std::vector<Vec2> pts) {
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace

Layout extract_layout(const MapDocument& doc) {
    Layout out;
    for (const auto& way : doc.ways) {
        std::vector<Vec2> pts;
        pts.reserve(way.refs.size());
        for (auto ref : way.refs) {
            const LatLon& ll = doc.nodes.at(ref);
            pts.push_back(project_local(ll.lat, ll.lon, doc.origin));
        }

        if (way.tags.contains("highway")) {
            RoadSpec road;
            road.centerline = dedupe_polyline(pts);
            road.width = road_width_for(way.tags);
            road.lane_count = lane_count_for(way.tags, road.width);
            if (road.centerline.size() < 2 || !(road.length() > 0.0)) {
                out.warnings.push_back(fmt::format("way {}: road has zero length, skipped", way.id));
            } else {
                out.roads.push_back(std::move(road));
            }
        }
        if (way.closed() && way.tags.contains("building")) {
            try {
                out.footprints.push_back({normalize_footprint(std::move(pts)), way.tags});
            } catch (const Error& e) {
                out.warnings.push_back(fmt::format("way {}: {}", way.id, e.what()));
            }
        }
    }
    return out;
}

namespace {

std::vector<Vec2> points_from_json(const nlohmann::json& arr, const char* what) {
    if (!arr.is_array()) fail(Errc::InvalidArgument, fmt::format("{}: 'points' must be an array", what));
    std::vector<Vec2> pts;
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            fail(Errc::InvalidArgument, fmt::format("{}: each point must be [x, y]", what));
        }
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return pts;
}

}  // namespace

Layout parse_layout_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(Errc::InvalidArgument, fmt::format("layout JSON: {}", e.what()));
    }
    if (!j.is_object()) fail(Errc::InvalidArgument, "layout JSON: top level must be an object");

    Layout out;
    for (const auto& r : j.value("roads", nlohmann::json::array())) {
        RoadSpec road;
        road.centerline = dedupe_polyline(points_from_json(r.value("points", nlohmann::json()), "road"));
        road.width = r.value("width", 6.0);
        if (!(road.width > 0)) fail(Errc::InvalidArgument, "road: width must be > 0");
        road.lane_count = r.value("lanes", std::max(1, static_cast<int>(std::lround(road.width / 3.0))));
        if (road.lane_count < 1) fail(Errc::InvalidArgument, "road: lanes must be >= 1");
        if (road.centerline.size() < 2 || !(road.length() > 0.0)) {
            out.warnings.push_back("road with zero length skipped");
            continue;
        }
        out.roads.push_back(std::move(road));
    }
    for (const auto& f : j.value("footprints", nlohmann::json::array())) {
        FootprintSpec fp;
        if (f.contains("tags")) {
            for (const auto& [k, v] : f["tags"].items()) fp.tags[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        if (f.contains("height")) fp.tags["height"] = fmt::format("{}", f["height"].get<double>());
        fp.tags.try_emplace("building", "yes");
        try {
            fp.polygon = normalize_footprint(points_from_json(f.value("points", nlohmann::json()), "footprint"));
            out.footprints.push_back(std::move(fp));
        } catch (const Error& e) {
            if (e.code() != Errc::DegenerateGeometry) throw;
            out.warnings.push_back(e.what());
        }
    }
    return out;
}

std::string layout_to_json(const Layout& layout) {
    nlohmann::json j;
    j["roads"] = nlohmann::json::array();
    for (const auto& r : layout.roads) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : r.centerline) pts.push_back({p.x(), p.y()});
        j["roads"].push_back({{"points", pts}, {"width", r.width}, {"lanes", r.lane_count}});
    }
    j["footprints"] = nlohmann::json::array();
    for (const auto& f : layout.footprints) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : f.polygon) pts.push_back({p.x(), p.y()});
        nlohmann::json entry = {{"points", pts}};
        nlohmann::json tags = nlohmann::json::object();
        for (const auto& [k, v] : f.tags) {
            if (k == "height") {
                entry["height"] = std::stod(v);
            } else {
                tags[k] = v;
            }
        }
        entry["tags"] = tags;
        j["footprints"].push_back(entry);
    }
    return j.dump(2);
}

Layout load_layout_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoFailure, fmt::format("cannot open map file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".json") return parse_layout_json(ss.str());
    return extract_layout(parse_osm(ss.str()));
}

}  // namespace peye
