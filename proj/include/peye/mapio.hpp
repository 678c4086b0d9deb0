#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "peye/geometry.hpp"

namespace peye {

using TagMap = std::map<std::string, std::string>;

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
    friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct Way {
    std::int64_t id = 0;
    std::vector<std::int64_t> refs;
    TagMap tags;

    bool closed() const { return refs.size() >= 2 && refs.front() == refs.back(); }
    friend bool operator==(const Way&, const Way&) = default;
};

/// Raw OSM content: nodes, ways and tags, plus the projection origin
/// (centroid of all node coordinates).
struct MapDocument {
    std::map<std::int64_t, LatLon> nodes;
    std::vector<Way> ways;
    LatLon origin;
    /// Ways dropped at parse time for violating the ref-count invariants.
    std::vector<std::string> warnings;

    friend bool operator==(const MapDocument& a, const MapDocument& b) {
        return a.nodes == b.nodes && a.ways == b.ways && a.origin == b.origin;
    }
};

struct RoadSpec {
    std::vector<Vec2> centerline;
    double width = 6.0;
    int lane_count = 1;

    double length() const;
};

struct FootprintSpec {
    std::vector<Vec2> polygon;  ///< CCW, simple, not closed (no repeated first point)
    TagMap tags;
};

struct Layout {
    std::vector<RoadSpec> roads;
    std::vector<FootprintSpec> footprints;
    std::vector<std::string> warnings;
};

/// Parses OSM XML v0.6 (osm/node/way/nd/tag). Relations and other elements are
/// skipped. Throws Error(MalformedXml) or Error(DanglingNodeRef).
MapDocument parse_osm(std::string_view xml_text);

/// Inverse of parse_osm up to formatting; re-parsing yields an equal document.
std::string serialize_osm(const MapDocument& doc);

inline constexpr double kEarthRadius = 6371000.0;

/// Local equirectangular projection around `origin`. Returns (east, north) meters.
Vec2 project_local(double lat, double lon, const LatLon& origin);

double road_width_for(const TagMap& tags);
int lane_count_for(const TagMap& tags, double width);

/// Routes highway ways to roads and closed building ways to footprints.
/// Degenerate footprints are skipped with a warning.
Layout extract_layout(const MapDocument& doc);

/// Validates and normalizes a footprint ring (drops closing duplicate and
/// collinear vertices, enforces CCW). Throws Error(DegenerateGeometry).
std::vector<Vec2> normalize_footprint(std::vector<Vec2> ring);

/// Native JSON layout:
/// {"roads":[{"points":[[x,y],...],"width":w,"lanes":n}],
///  "footprints":[{"points":[[x,y],...],"height":h,"tags":{...}}]}
/// Throws Error(InvalidArgument) on schema violations.
Layout parse_layout_json(std::string_view json_text);
std::string layout_to_json(const Layout& layout);

/// Loads either format, picked by extension (.osm/.xml vs .json).
/// Throws Error(IoFailure) when the file cannot be read.
Layout load_layout_file(const std::string& path);

}  // namespace peye
