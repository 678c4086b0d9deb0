#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "peye/error.hpp"
#include "peye/eval.hpp"

namespace peye {

std::string_view ap_mode_name(ApMode m) {
    return m == ApMode::Continuous ? "continuous" : "voc2007_11pt";
}

ApMode ap_mode_from_name(std::string_view name) {
    if (name == "voc2007_11pt" || name == "11pt") return ApMode::Voc07ElevenPoint;
    if (name == "continuous") return ApMode::Continuous;
    fail(Errc::InvalidArgument, fmt::format("unknown AP mode '{}'", name));
}

double iou(const VocBox& a, const VocBox& b) {
    const long long iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin) + 1;
    const long long ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin) + 1;
    if (iw <= 0 || ih <= 0) return 0.0;
    const double inter = static_cast<double>(iw * ih);
    return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                             const EvalConfig& config) {
    if (!(config.iou_threshold > 0.0 && config.iou_threshold <= 1.0)) {
        fail(Errc::InvalidArgument, fmt::format("IoU threshold {} outside (0, 1]", config.iou_threshold));
    }
    MatchResult out;
    out.order.resize(dets.size());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
        if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
        return dets[a].image_id < dets[b].image_id;
    });

    for (const auto& g : gts) {
        if (!(g.difficult && config.ignore_difficult)) ++out.npos;
    }

    std::vector<bool> taken(gts.size(), false);
    out.flags.reserve(dets.size());
    for (std::size_t di : out.order) {
        const Detection& d = dets[di];
        double best = -1.0;
        std::size_t best_gt = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || gts[g].image_id != d.image_id) continue;
            const double o = iou(d.box, gts[g].box);
            if (o > best) {
                best = o;
                best_gt = g;
            }
        }
        if (best_gt == gts.size() || best < config.iou_threshold) {
            out.flags.push_back(MatchFlag::FalsePositive);
            continue;
        }
        taken[best_gt] = true;
        out.flags.push_back(gts[best_gt].difficult && config.ignore_difficult ? MatchFlag::Ignored
                                                                               : MatchFlag::TruePositive);
    }
    return out;
}

std::vector<PRPoint> precision_recall(std::span<const MatchFlag> flags, std::size_t npos) {
    std::vector<PRPoint> curve;
    std::size_t tp = 0, fp = 0;
    for (MatchFlag f : flags) {
        if (f == MatchFlag::Ignored) continue;
        (f == MatchFlag::TruePositive ? tp : fp) += 1;
        const double recall = npos == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(npos);
        curve.push_back({recall, static_cast<double>(tp) / static_cast<double>(tp + fp)});
    }
    return curve;
}

double average_precision(std::span<const MatchFlag> flags, std::size_t npos, ApMode mode) {
    if (npos == 0) return 0.0;
    const auto curve = precision_recall(flags, npos);

    if (mode == ApMode::Voc07ElevenPoint) {
        double sum = 0.0;
        for (int i = 0; i <= 10; ++i) {
            const double r = i / 10.0;
            double p = 0.0;
            for (const auto& pt : curve) {
                if (pt.recall >= r) p = std::max(p, pt.precision);
            }
            sum += p;
        }
        return sum / 11.0;
    }

    std::vector<double> rec{0.0}, prec{0.0};
    for (const auto& pt : curve) {
        rec.push_back(pt.recall);
        prec.push_back(pt.precision);
    }
    rec.push_back(1.0);
    prec.push_back(0.0);
    for (std::size_t i = prec.size() - 1; i > 0; --i) prec[i - 1] = std::max(prec[i - 1], prec[i]);
    double ap = 0.0;
    for (std::size_t i = 1; i < rec.size(); ++i) {
        if (rec[i] != rec[i - 1]) ap += (rec[i] - rec[i - 1]) * prec[i];
    }
    return ap;
}

double rate_of_descent(double ap_ref, double ap) {
    if (!(ap_ref > 0.0)) fail(Errc::ZeroReference, fmt::format("reference AP {} is not positive", ap_ref));
    return (ap_ref - ap) / ap_ref;
}

std::vector<DescentRow> descent_table(const std::map<std::string, double>& reference,
                                      const std::map<std::string, double>& measured) {
    std::vector<DescentRow> rows;
    for (const auto& [key, ref] : reference) {
        const auto it = measured.find(key);
        if (it == measured.end()) continue;
        rows.push_back({key, ref, it->second, rate_of_descent(ref, it->second)});
    }
    return rows;
}

}  // namespace peye
