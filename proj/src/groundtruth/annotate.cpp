#include <fmt/format.h>

#include <algorithm>

#include "peye/error.hpp"
#include "peye/groundtruth.hpp"

namespace peye {

std::string_view area_class_name(AreaClass c) {
    switch (c) {
        case AreaClass::Small: return "small";
        case AreaClass::Medium: return "medium";
        case AreaClass::Large: return "large";
    }
    return "medium";
}

std::string_view occlusion_class_name(OcclusionClass c) {
    switch (c) {
        case OcclusionClass::Slightly: return "slightly";
        case OcclusionClass::Partly: return "partly";
        case OcclusionClass::Largely: return "largely";
    }
    return "partly";
}

std::map<std::uint32_t, MaskExtent> instance_masks(const FrameBuffers& buffers) {
    std::map<std::uint32_t, MaskExtent> out;
    for (int y = 0; y < buffers.height; ++y) {
        const std::uint32_t* row = buffers.instance.data() + buffers.index(0, y);
        for (int x = 0; x < buffers.width; ++x) {
            const std::uint32_t id = row[x];
            if (id == 0) continue;
            MaskExtent& m = out[id];
            if (m.count == 0) {
                m.col_min = m.col_max = x;
                m.row_min = m.row_max = y;
            } else {
                m.col_min = std::min(m.col_min, x);
                m.col_max = std::max(m.col_max, x);
                m.row_max = y;  // rows are scanned in order
            }
            ++m.count;
        }
    }
    return out;
}

VocBox tight_bbox(const MaskExtent& e) {
    if (e.count == 0 || e.col_max < e.col_min || e.row_max < e.row_min) fail(Errc::EmptyMask, "mask has no pixels");
    return {e.col_min + 1, e.row_min + 1, e.col_max + 1, e.row_max + 1};
}

AreaClass classify_area(const VocBox& box, const ClassThresholds& th) {
    const long long a = box.area();
    if (a < th.small_area) return AreaClass::Small;
    if (a > th.large_area) return AreaClass::Large;
    return AreaClass::Medium;
}

OcclusionClass classify_occlusion(double rate, const ClassThresholds& th) {
    if (rate < th.occ_low) return OcclusionClass::Slightly;
    if (rate > th.occ_high) return OcclusionClass::Largely;
    return OcclusionClass::Partly;
}

namespace {

const Entity& require_entity(const World& world, std::uint32_t id) {
    const Entity* e = world.find(id);
    if (e == nullptr) fail(Errc::InvalidArgument, fmt::format("no entity with id {}", id));
    return *e;
}

double rate_from_counts(std::size_t visible, std::size_t solo) {
    return std::clamp(1.0 - static_cast<double>(visible) / static_cast<double>(solo), 0.0, 1.0);
}

}  // namespace

double occlusion_rate(const World& world, const RigidTransform& camera_to_world, const Intrinsics& K,
                      const RenderSettings& settings, std::uint32_t instance) {
    const Entity& e = require_entity(world, instance);
    const SoloCoverage solo = render_solo(e, camera_to_world, K, settings);
    if (solo.pixels == 0) fail(Errc::FullyOutOfView, fmt::format("instance {} covers no pixel", instance));
    const FrameBuffers full = rasterize(world, camera_to_world, K, settings);
    const auto visible = static_cast<std::size_t>(std::count(full.instance.begin(), full.instance.end(), instance));
    return rate_from_counts(visible, solo.pixels);
}

bool truncation_flag(const World& world, const RigidTransform& camera_to_world, const Intrinsics& K,
                     std::uint32_t instance, int lod) {
    const Entity& e = require_entity(world, instance);
    const Mesh& mesh = e.mesh(lod);
    const RigidTransform M = camera_to_world.inverse().compose(e.pose.to_transform());
    std::vector<Vec3> cam(mesh.vertices.size());
    for (std::size_t i = 0; i < cam.size(); ++i) cam[i] = M.apply(mesh.vertices[i]);

    const double u_lo = 0.5, u_hi = K.width - 0.5, v_lo = 0.5, v_hi = K.height - 0.5;
    for (const Vec3& p : cam) {
        if (p.z() < K.near) continue;
        const Vec2 q = project_point(K, p);
        if (q.x() < u_lo || q.x() > u_hi || q.y() < v_lo || q.y() > v_hi) return true;
    }
    for (const auto& t : mesh.triangles) {
        int behind = 0;
        for (auto i : t) behind += cam[i].z() < K.near ? 1 : 0;
        if (behind > 0 && behind < 3) return true;
    }
    return false;
}

std::vector<InstanceObservation> annotate_frame(const World& world, const RigidTransform& camera_to_world,
                                                const Intrinsics& K, const RenderSettings& settings,
                                                const FrameBuffers& buffers, const AnnotationOptions& options) {
    std::vector<InstanceObservation> out;
    const Vec3 cam_pos = camera_to_world.t;
    for (const auto& [id, extent] : instance_masks(buffers)) {
        const Entity* e = world.find(id);
        if (e == nullptr || !is_vehicle(e->cls)) continue;
        if (extent.count < options.min_visible_pixels) continue;
        const VocBox box = tight_bbox(extent);
        if (box.width() < options.min_box_side || box.height() < options.min_box_side) continue;

        const SoloCoverage solo = render_solo(*e, camera_to_world, K, settings);
        if (solo.pixels == 0) continue;

        int lod = 0;
        if (settings.lod) {
            const Vec3 c = e->pose.to_transform().apply(e->mesh(0).center);
            lod = select_lod((c - cam_pos).norm(), settings.lod_near, settings.lod_far);
        }

        InstanceObservation obs;
        obs.id = id;
        obs.cls = e->cls;
        obs.visible_pixels = extent.count;
        obs.solo_pixels = solo.pixels;
        obs.bbox_visible = box;
        obs.bbox_full = {solo.x_min + 1, solo.y_min + 1, solo.x_max + 1, solo.y_max + 1};
        obs.occlusion_rate = rate_from_counts(extent.count, solo.pixels);
        obs.truncated = solo.near_clipped || truncation_flag(world, camera_to_world, K, id, lod);
        obs.area_class = classify_area(box, options.thresholds);
        obs.occlusion_class = classify_occlusion(obs.occlusion_rate, options.thresholds);
        out.push_back(obs);
    }
    return out;
}

}  // namespace peye
