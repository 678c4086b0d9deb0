#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "peye/error.hpp"
#include "peye/eval.hpp"

namespace peye {

EvalReport evaluate(const DatasetIndex& index, std::span<const Detection> detections, const EvalConfig& config) {
    EvalReport report;
    report.config = config;

    std::set<std::string> known;
    for (auto c : kVehicleClasses) known.insert(std::string(class_name(c)));
    for (const auto& r : index.images) {
        for (const auto& o : r.objects) known.insert(o.name);
    }
    for (const auto& d : detections) {
        if (known.count(d.cls) == 0) {
            fail(Errc::UnknownClass, fmt::format("detection class '{}' is not in the dataset", d.cls));
        }
    }

    for (auto c : kVehicleClasses) {
        const std::string name(class_name(c));
        std::vector<GroundTruth> gts;
        for (const auto& r : index.images) {
            for (const auto& o : r.objects) {
                if (o.name == name) gts.push_back({r.id, o.bndbox, o.difficult});
            }
        }
        std::vector<Detection> dets;
        for (const auto& d : detections) {
            if (d.cls == name) dets.push_back(d);
        }

        ClassResult cr;
        cr.cls = name;
        cr.detections = dets.size();
        const MatchResult m = match_detections(dets, gts, config);
        cr.npos = m.npos;
        if (gts.empty()) {
            report.classes.push_back(cr);
            continue;
        }
        if (m.npos == 0) report.warnings.push_back(fmt::format("class {} has only difficult objects; AP set to 0", name));
        cr.ap = average_precision(m.flags, m.npos, config.ap_mode);
        report.classes.push_back(cr);
    }
    return report;
}

std::vector<Detection> parse_detections_jsonl(std::string_view text) {
    std::vector<Detection> out;
    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Detection d;
            d.image_id = j.at("image_id").get<std::string>();
            d.cls = j.at("class").get<std::string>();
            const auto& b = j.at("bbox");
            if (!b.is_array() || b.size() != 4) throw std::invalid_argument("bbox must hold four numbers");
            d.box = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
            d.score = j.at("score").get<double>();
            if (!std::isfinite(d.score)) throw std::invalid_argument("score is not finite");
            if (d.box.xmin > d.box.xmax || d.box.ymin > d.box.ymax) throw std::invalid_argument("bbox is inverted");
            out.push_back(std::move(d));
        } catch (const std::exception& e) {
            fail(Errc::InvalidArgument, fmt::format("detections line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

std::vector<Detection> read_detections_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoFailure, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_detections_jsonl(ss.str());
}

std::string report_to_json(const EvalReport& report, const std::vector<DescentRow>& descent) {
    nlohmann::ordered_json j;
    j["iou_threshold"] = report.config.iou_threshold;
    j["ap_mode"] = std::string(ap_mode_name(report.config.ap_mode));
    j["ignore_difficult"] = report.config.ignore_difficult;
    auto& classes = j["classes"] = nlohmann::ordered_json::array();
    for (const auto& c : report.classes) {
        nlohmann::ordered_json row;
        row["class"] = c.cls;
        row["npos"] = c.npos;
        row["detections"] = c.detections;
        row["ap"] = c.ap ? nlohmann::ordered_json(*c.ap) : nlohmann::ordered_json(nullptr);
        classes.push_back(row);
    }
    if (!descent.empty()) {
        auto& rows = j["rate_of_descent"] = nlohmann::ordered_json::array();
        for (const auto& d : descent) {
            rows.push_back({{"key", d.key}, {"ap_ref", d.ap_ref}, {"ap", d.ap}, {"descent", d.descent}});
        }
    }
    j["warnings"] = report.warnings;
    return j.dump(2);
}

std::string report_to_table(const EvalReport& report, const std::vector<DescentRow>& descent) {
    std::string out = fmt::format("IoU {:.2f}, {}\n", report.config.iou_threshold, ap_mode_name(report.config.ap_mode));
    out += fmt::format("{:<8} {:>6} {:>6} {:>7}\n", "class", "gt", "dets", "AP(%)");
    for (const auto& c : report.classes) {
        const std::string ap = c.ap ? fmt::format("{:.1f}", 100.0 * *c.ap) : std::string("-");
        out += fmt::format("{:<8} {:>6} {:>6} {:>7}\n", c.cls, c.npos, c.detections, ap);
    }
    if (!descent.empty()) {
        out += fmt::format("\n{:<12} {:>7} {:>7} {:>9}\n", "key", "ref(%)", "AP(%)", "descent");
        for (const auto& d : descent) {
            out += fmt::format("{:<12} {:>7.1f} {:>7.1f} {:>8.1f}%\n", d.key, 100.0 * d.ap_ref, 100.0 * d.ap,
                               100.0 * d.descent);
        }
    }
    return out;
}

}  // namespace peye
