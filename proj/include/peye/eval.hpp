#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peye/dataset.hpp"

namespace peye {

struct Detection {
    std::string image_id;
    std::string cls;
    VocBox box;
    double score = 0.0;
};

struct GroundTruth {
    std::string image_id;
    VocBox box;
    bool difficult = false;
};

enum class ApMode { Voc07ElevenPoint, Continuous };
std::string_view ap_mode_name(ApMode m);
/// Accepts "voc2007_11pt" and "continuous".
ApMode ap_mode_from_name(std::string_view name);

struct EvalConfig {
    double iou_threshold = 0.5;
    ApMode ap_mode = ApMode::Voc07ElevenPoint;
    bool ignore_difficult = true;
};

/// Inclusive pixel areas; 0 for disjoint boxes.
double iou(const VocBox& a, const VocBox& b);

enum class MatchFlag : std::uint8_t { FalsePositive, TruePositive, Ignored };

struct MatchResult {
    std::vector<std::size_t> order;  ///< detection indices, highest score first
    std::vector<MatchFlag> flags;    ///< parallel to `order`
    std::size_t npos = 0;            ///< ground truths that count toward recall
};

/// Greedy matching of one class. Detections are ranked by score, then image
/// id, then input position; each takes the unmatched ground truth of highest
/// IoU in its image. A hit on a difficult ground truth is Ignored when
/// `ignore_difficult` is set.
MatchResult match_detections(std::span<const Detection> detections, std::span<const GroundTruth> truths,
                             const EvalConfig& config);

struct PRPoint {
    double recall = 0.0;
    double precision = 0.0;
};

/// One point per non-ignored detection in ranked order.
std::vector<PRPoint> precision_recall(std::span<const MatchFlag> flags, std::size_t npos);

/// Returns 0 when npos is 0.
double average_precision(std::span<const MatchFlag> flags, std::size_t npos, ApMode mode);

struct ClassResult {
    std::string cls;
    std::size_t npos = 0;
    std::size_t detections = 0;
    std::optional<double> ap;  ///< absent when the class has no ground truth
};

struct EvalReport {
    EvalConfig config;
    std::vector<ClassResult> classes;
    std::vector<std::string> warnings;
};

/// Per-class AP over car, bus and truck. Throws Error(UnknownClass) for a
/// detection whose class is neither a vehicle class nor present in the data.
EvalReport evaluate(const DatasetIndex& index, std::span<const Detection> detections, const EvalConfig& config);

/// (ap_ref - ap) / ap_ref. Throws Error(ZeroReference) unless ap_ref > 0.
double rate_of_descent(double ap_ref, double ap);

struct DescentRow {
    std::string key;
    double ap_ref = 0.0;
    double ap = 0.0;
    double descent = 0.0;
};
/// Rows for every key present in both maps, in key order.
std::vector<DescentRow> descent_table(const std::map<std::string, double>& reference,
                                      const std::map<std::string, double>& measured);

/// One JSON object per line: image_id, class, bbox [xmin, ymin, xmax, ymax], score.
std::vector<Detection> parse_detections_jsonl(std::string_view text);
std::vector<Detection> read_detections_jsonl(const std::filesystem::path& path);

std::string report_to_json(const EvalReport& report, const std::vector<DescentRow>& descent = {});
std::string report_to_table(const EvalReport& report, const std::vector<DescentRow>& descent = {});

}  // namespace peye
