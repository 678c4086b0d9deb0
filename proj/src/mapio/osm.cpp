#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <set>

#include "peye/error.hpp"
#include "peye/mapio.hpp"
#include "peye/xml.hpp"

namespace peye {

namespace {

const std::string& required_attr(const xml::Element& e, std::string_view key) {
    const std::string* v = e.attribute(key);
    if (!v) {
        fail(Errc::MalformedXml,
             fmt::format("line {}: <{}> is missing attribute '{}'", e.line, e.name, key));
    }
    return *v;
}

template <typename T>
T parse_number(const xml::Element& e, std::string_view key) {
    const std::string& text = required_attr(e, key);
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        fail(Errc::MalformedXml, fmt::format("line {}: <{}> attribute '{}' is not a number: '{}'",
                                             e.line, e.name, key, text));
    }
    return value;
}

}  // namespace

MapDocument parse_osm(std::string_view xml_text) {
    const xml::Element root = xml::parse(xml_text);
    if (root.name != "osm") {
        fail(Errc::MalformedXml,
             fmt::format("line {}: expected <osm> root, got <{}>", root.line, root.name));
    }

    MapDocument doc;
    std::vector<long> way_lines;
    for (const auto& e : root.children) {
        if (e.name == "node") {
            const auto id = parse_number<std::int64_t>(e, "id");
            LatLon ll{parse_number<double>(e, "lat"), parse_number<double>(e, "lon")};
            if (!(std::abs(ll.lat) <= 90.0) || !(std::abs(ll.lon) <= 180.0)) {
                fail(Errc::MalformedXml,
                     fmt::format("line {}: node {} coordinates out of range", e.line, id));
            }
            doc.nodes[id] = ll;
        } else if (e.name == "way") {
            Way way;
            way.id = parse_number<std::int64_t>(e, "id");
            for (const auto& c : e.children) {
                if (c.name == "nd") {
                    const auto ref = parse_number<std::int64_t>(c, "ref");
                    if (way.refs.empty() || way.refs.back() != ref) way.refs.push_back(ref);
                } else if (c.name == "tag") {
                    way.tags[required_attr(c, "k")] = required_attr(c, "v");
                }
            }
            doc.ways.push_back(std::move(way));
            way_lines.push_back(e.line);
        }
    }

    // Nodes may follow the ways that use them, so resolve refs afterwards.
    for (std::size_t i = 0; i < doc.ways.size(); ++i) {
        for (auto ref : doc.ways[i].refs) {
            if (!doc.nodes.contains(ref)) {
                fail(Errc::DanglingNodeRef,
                     fmt::format("line {}: way {} references unknown node {}", way_lines[i],
                                 doc.ways[i].id, ref));
            }
        }
    }

    std::erase_if(doc.ways, [&](const Way& w) {
        if (w.refs.size() < 2) {
            doc.warnings.push_back(fmt::format("way {} dropped: fewer than 2 node refs", w.id));
            return true;
        }
        if (w.closed() && w.refs.size() < 4) {
            doc.warnings.push_back(fmt::format("way {} dropped: closed way with < 4 refs", w.id));
            return true;
        }
        return false;
    });

    if (!doc.nodes.empty()) {
        double lat = 0.0, lon = 0.0;
        for (const auto& [id, ll] : doc.nodes) {
            lat += ll.lat;
            lon += ll.lon;
        }
        const auto n = static_cast<double>(doc.nodes.size());
        doc.origin = {lat / n, lon / n};
    }
    return doc;
}

std::string serialize_osm(const MapDocument& doc) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"peye\">\n";
    for (const auto& [id, ll] : doc.nodes) {
        out += fmt::format("  <node id=\"{}\" lat=\"{}\" lon=\"{}\"/>\n", id, ll.lat, ll.lon);
    }
    for (const auto& w : doc.ways) {
        out += fmt::format("  <way id=\"{}\">\n", w.id);
        for (auto ref : w.refs) out += fmt::format("    <nd ref=\"{}\"/>\n", ref);
        for (const auto& [k, v] : w.tags) {
            out += fmt::format("    <tag k=\"{}\" v=\"{}\"/>\n", xml::escape(k), xml::escape(v));
        }
        out += "  </way>\n";
    }
    out += "</osm>\n";
    return out;
}

Vec2 project_local(double lat, double lon, const LatLon& origin) {
    const double x = kEarthRadius * (lon - origin.lon) * kPi / 180.0 * std::cos(origin.lat * kPi / 180.0);
    const double y = kEarthRadius * (lat - origin.lat) * kPi / 180.0;
    return {x, y};
}

}  // namespace peye
