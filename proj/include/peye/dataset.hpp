#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peye/groundtruth.hpp"
#include "peye/render.hpp"

namespace peye {

struct VocObject {
    std::string name;
    VocBox bndbox;
    bool truncated = false;
    bool difficult = false;
    std::optional<double> occ_rate;  ///< written as a non-standard child element

    friend bool operator==(const VocObject&, const VocObject&) = default;
};

/// One annotation file. `id` is the file stem shared by every per-frame output.
struct ImageRecord {
    std::string id;
    std::string folder = "peye";
    std::string filename;
    int width = 0;
    int height = 0;
    int depth = 3;
    std::vector<VocObject> objects;

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

std::string write_voc_xml(const ImageRecord& record);
/// Unknown elements are ignored. Throws Error(MalformedXml) on syntax or
/// missing required fields, Error(BoxOutOfBounds) for boxes outside the image.
ImageRecord parse_voc_xml(std::string_view xml_text);

/// Observation to VOC object. truncated is copied, difficult is always 0.
VocObject to_voc_object(const InstanceObservation& obs);

// ---- image files -----------------------------------------------------------

struct PngImage {
    int width = 0;
    int height = 0;
    int channels = 0;   ///< 1 or 3 after palette indices are kept as-is
    int bit_depth = 0;  ///< 8 or 16
    bool indexed = false;
    std::vector<std::uint16_t> samples;  ///< row-major, channels interleaved
    std::vector<Rgb> palette;
};

void write_png_rgb(const std::filesystem::path& path, int width, int height, const std::uint8_t* rgb);
void write_png_gray16(const std::filesystem::path& path, int width, int height, const std::uint16_t* values);
void write_png_indexed(const std::filesystem::path& path, int width, int height, const std::uint8_t* indices,
                       const std::vector<Rgb>& palette);
/// Reads 8/16-bit gray, RGB and palette images without expanding palettes.
PngImage read_png(const std::filesystem::path& path);

/// Centimetres, floored, saturated at 65535; 0 where nothing was hit.
std::vector<std::uint16_t> quantize_depth_cm(const std::vector<float>& depth);

/// "PEFL", width and height as little-endian u32, the u plane and the v plane
/// as little-endian f32, then one validity byte per pixel.
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

struct FramePaths {
    std::filesystem::path image, annotation, depth, instance, cls, flow;
};
FramePaths frame_paths(const std::filesystem::path& root, std::string_view id);

/// Creates the dataset sub-directories under `root`.
void create_layout(const std::filesystem::path& root);

/// Writes every per-frame file. Throws Error(IoFailure) on any write error or
/// Error(InvalidArgument) when buffer and flow sizes disagree.
void write_frame_outputs(const FrameBuffers& buffers, const FlowField& flow, const ImageRecord& record,
                         const FramePaths& paths);

// ---- index and surgery -----------------------------------------------------

struct DatasetIndex {
    std::filesystem::path root;
    std::vector<ImageRecord> images;
    std::map<std::string, std::vector<std::string>> splits;  ///< ImageSets/Main/<name>.txt
    std::string provenance;

    std::size_t object_count() const;
    const ImageRecord* find(std::string_view id) const;
};

/// Reads Annotations/*.xml (sorted by id), ImageSets/Main/*.txt and the
/// manifest provenance when present.
DatasetIndex load_dataset(const std::filesystem::path& root);

/// Writes annotations, image sets and a small manifest. When `source_root` is
/// given, per-frame image, depth, instance, class and flow files of the kept
/// ids are copied from it.
void save_dataset(const DatasetIndex& index, const std::filesystem::path& root,
                  const std::optional<std::filesystem::path>& source_root = std::nullopt);

struct DatasetStats {
    std::size_t images = 0;
    std::size_t objects = 0;
    std::map<std::string, std::size_t> per_class;
    std::map<std::size_t, std::size_t> instances_per_image;  ///< objects in image -> images
    std::array<std::size_t, 3> area{};                      ///< Small, Medium, Large
    std::optional<std::array<std::size_t, 3>> occlusion;    ///< absent if any occ_rate missing

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats compute_stats(const DatasetIndex& index, const ClassThresholds& th = {});
std::string stats_to_json(const DatasetStats& stats);

/// Drops objects with box area below `min_area`, then images left empty.
DatasetIndex filter_min_area(const DatasetIndex& index, long long min_area);
/// Keeps objects with occ_rate == 0 and not truncated, then drops empty images.
/// Throws Error(MissingOcclusionData) if any object lacks occ_rate.
DatasetIndex filter_fully_visible(const DatasetIndex& index);

/// Image-level partition; train size is round-half-up of n*a/(a+b).
std::pair<DatasetIndex, DatasetIndex> split(const DatasetIndex& index, int a, int b, std::uint64_t seed);
std::size_t split_train_size(std::size_t n, int a, int b);

/// Union with ids rewritten to "<namespace>_<id>". Throws
/// Error(DuplicateNamespace) when a namespace repeats.
DatasetIndex mix(const std::vector<std::pair<std::string, DatasetIndex>>& sources);

/// n images without replacement, kept in their original order.
/// Throws Error(SampleTooLarge) when n exceeds the image count.
DatasetIndex sample(const DatasetIndex& index, std::size_t n, std::uint64_t seed);

}  // namespace peye
