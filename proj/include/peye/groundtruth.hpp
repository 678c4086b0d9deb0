#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "peye/render.hpp"
#include "peye/worldgen.hpp"

namespace peye {

/// Pixel box, 1-based and inclusive on both ends.
struct VocBox {
    int xmin = 1, ymin = 1, xmax = 1, ymax = 1;

    int width() const { return xmax - xmin + 1; }
    int height() const { return ymax - ymin + 1; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    friend bool operator==(const VocBox&, const VocBox&) = default;
};

enum class AreaClass { Small, Medium, Large };
enum class OcclusionClass { Slightly, Partly, Largely };
std::string_view area_class_name(AreaClass c);
std::string_view occlusion_class_name(OcclusionClass c);

struct ClassThresholds {
    long long small_area = 1024;  // 32 x 32
    long long large_area = 9216;  // 96 x 96
    double occ_low = 0.1;
    double occ_high = 0.35;
};

struct AnnotationOptions {
    ClassThresholds thresholds;
    std::size_t min_visible_pixels = 20;
    int min_box_side = 2;
};

struct InstanceObservation {
    std::uint32_t id = 0;
    ObjectClass cls = ObjectClass::Car;
    std::size_t visible_pixels = 0;
    std::size_t solo_pixels = 0;
    VocBox bbox_visible;
    VocBox bbox_full;
    double occlusion_rate = 0.0;
    bool truncated = false;
    AreaClass area_class = AreaClass::Medium;
    OcclusionClass occlusion_class = OcclusionClass::Slightly;
};

/// Pixel count and 0-based inclusive extent of one instance.
struct MaskExtent {
    std::size_t count = 0;
    int col_min = 0, col_max = -1, row_min = 0, row_max = -1;
};

std::map<std::uint32_t, MaskExtent> instance_masks(const FrameBuffers& buffers);

/// Shifts a 0-based extent to a 1-based VOC box. Throws Error(EmptyMask) when
/// the extent holds no pixels.
VocBox tight_bbox(const MaskExtent& extent);

/// 1 - visible/solo from a full render and a render of the instance alone.
/// Throws Error(FullyOutOfView) when the instance covers no pixel on its own.
double occlusion_rate(const World& world, const RigidTransform& camera_to_world, const Intrinsics& K,
                      const RenderSettings& settings, std::uint32_t instance);

/// True when a vertex in front of the near plane projects beyond the outer
/// pixel centres, or when a triangle straddles the near plane.
bool truncation_flag(const World& world, const RigidTransform& camera_to_world, const Intrinsics& K,
                     std::uint32_t instance, int lod = 0);

struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> u;  ///< pixels per frame, current minus previous position
    std::vector<float> v;
    std::vector<std::uint8_t> valid;

    FlowField() = default;
    FlowField(int w, int h);
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
};

/// Dense flow for every hit pixel of `buffers`. Pixels are invalid on
/// background, when the entity has no pose in `previous`, when the source
/// point falls behind the previous camera, or when it lands off-image.
FlowField compute_flow(const World& current, const World& previous, const RigidTransform& camera_current,
                       const RigidTransform& camera_previous, const Intrinsics& K, const FrameBuffers& buffers);

AreaClass classify_area(const VocBox& box, const ClassThresholds& th = {});
OcclusionClass classify_occlusion(double rate, const ClassThresholds& th = {});

/// Observations for car, bus and truck instances that pass the inclusion filter.
std::vector<InstanceObservation> annotate_frame(const World& world, const RigidTransform& camera_to_world,
                                                const Intrinsics& K, const RenderSettings& settings,
                                                const FrameBuffers& buffers, const AnnotationOptions& options = {});

}  // namespace peye
