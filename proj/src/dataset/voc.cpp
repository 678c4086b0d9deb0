#include <fmt/format.h>

#include <charconv>
#include <cmath>

#include "peye/dataset.hpp"
#include "peye/error.hpp"
#include "peye/xml.hpp"

namespace peye {

namespace {

[[noreturn]] void malformed(const xml::Element& at, std::string_view what) {
    fail(Errc::MalformedXml, fmt::format("line {}: {}", at.line, what));
}

double number(const xml::Element& parent, std::string_view name) {
    bool found = false;
    const std::string text = parent.child_text(name, &found);
    if (!found) malformed(parent, fmt::format("<{}> lacks <{}>", parent.name, name));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        malformed(*parent.child(name), fmt::format("<{}> is not a number: '{}'", name, text));
    }
    return v;
}

int integer(const xml::Element& parent, std::string_view name) {
    const double v = number(parent, name);
    // some tools write pixel coordinates as "12.0"
    if (v != std::round(v) || std::abs(v) > 1e9) {
        malformed(*parent.child(name), fmt::format("<{}> is not an integer", name));
    }
    return static_cast<int>(v);
}

bool flag(const xml::Element& parent, std::string_view name) {
    if (parent.child(name) == nullptr) return false;
    return integer(parent, name) != 0;
}

}  // namespace

std::string write_voc_xml(const ImageRecord& r) {
    std::string out;
    out += "<annotation>\n";
    out += fmt::format("  <folder>{}</folder>\n", xml::escape(r.folder));
    out += fmt::format("  <filename>{}</filename>\n", xml::escape(r.filename));
    out += fmt::format("  <size>\n    <width>{}</width>\n    <height>{}</height>\n    <depth>{}</depth>\n  </size>\n",
                       r.width, r.height, r.depth);
    for (const auto& o : r.objects) {
        out += "  <object>\n";
        out += fmt::format("    <name>{}</name>\n", xml::escape(o.name));
        out += "    <pose>Unspecified</pose>\n";
        out += fmt::format("    <truncated>{}</truncated>\n", o.truncated ? 1 : 0);
        out += fmt::format("    <difficult>{}</difficult>\n", o.difficult ? 1 : 0);
        out += fmt::format(
            "    <bndbox>\n      <xmin>{}</xmin>\n      <ymin>{}</ymin>\n      <xmax>{}</xmax>\n      <ymax>{}</ymax>\n"
            "    </bndbox>\n",
            o.bndbox.xmin, o.bndbox.ymin, o.bndbox.xmax, o.bndbox.ymax);
        if (o.occ_rate) out += fmt::format("    <occ_rate>{}</occ_rate>\n", *o.occ_rate);
        out += "  </object>\n";
    }
    out += "</annotation>\n";
    return out;
}

ImageRecord parse_voc_xml(std::string_view xml_text) {
    const xml::Element root = xml::parse(xml_text);
    if (root.name != "annotation") malformed(root, fmt::format("root element is <{}>, expected <annotation>", root.name));

    ImageRecord r;
    r.folder = root.child_text("folder");
    r.filename = root.child_text("filename");
    const auto dot = r.filename.rfind('.');
    r.id = dot == std::string::npos ? r.filename : r.filename.substr(0, dot);

    const xml::Element* size = root.child("size");
    if (size == nullptr) malformed(root, "missing <size>");
    r.width = integer(*size, "width");
    r.height = integer(*size, "height");
    r.depth = size->child("depth") != nullptr ? integer(*size, "depth") : 3;
    if (r.width <= 0 || r.height <= 0) malformed(*size, "image size must be positive");

    for (const auto& el : root.children) {
        if (el.name != "object") continue;
        VocObject o;
        o.name = el.child_text("name");
        if (o.name.empty()) malformed(el, "object without <name>");
        o.truncated = flag(el, "truncated");
        o.difficult = flag(el, "difficult");
        const xml::Element* box = el.child("bndbox");
        if (box == nullptr) malformed(el, "object without <bndbox>");
        o.bndbox = {integer(*box, "xmin"), integer(*box, "ymin"), integer(*box, "xmax"), integer(*box, "ymax")};
        const VocBox& b = o.bndbox;
        if (b.xmin < 1 || b.ymin < 1 || b.xmin > b.xmax || b.ymin > b.ymax || b.xmax > r.width || b.ymax > r.height) {
            fail(Errc::BoxOutOfBounds, fmt::format("line {}: box ({}, {}, {}, {}) outside {}x{} image", box->line, b.xmin,
                                                   b.ymin, b.xmax, b.ymax, r.width, r.height));
        }
        if (el.child("occ_rate") != nullptr) o.occ_rate = number(el, "occ_rate");
        r.objects.push_back(std::move(o));
    }
    return r;
}

VocObject to_voc_object(const InstanceObservation& obs) {
    VocObject o;
    o.name = std::string(class_name(obs.cls));
    o.bndbox = obs.bbox_visible;
    o.truncated = obs.truncated;
    o.difficult = false;
    o.occ_rate = obs.occlusion_rate;
    return o;
}

}  // namespace peye
