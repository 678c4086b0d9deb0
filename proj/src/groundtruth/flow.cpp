#include <cmath>

#include "peye/groundtruth.hpp"

namespace peye {

FlowField::FlowField(int w, int h)
    : width(w), height(h), u(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f), v(u.size(), 0.0f),
      valid(u.size(), 0) {}

namespace {

/// Per-id transform taking a world point on the entity at time t to where
/// the same material point sat at t-1.
struct BackwardMotion {
    bool known = false;
    bool is_static = true;
    RigidTransform T;
};

std::vector<BackwardMotion> backward_motions(const World& current, const World& previous) {
    std::uint32_t max_id = 0;
    for (const auto& e : current.entities) max_id = std::max(max_id, e.id);
    std::vector<BackwardMotion> out(static_cast<std::size_t>(max_id) + 1);
    for (const auto& e : current.entities) {
        const Entity* prev = previous.find(e.id);
        if (prev == nullptr) continue;
        BackwardMotion& m = out[e.id];
        m.known = true;
        m.is_static = prev->pose == e.pose;
        if (!m.is_static) m.T = prev->pose.to_transform().compose(e.pose.to_transform().inverse());
    }
    return out;
}

}  // namespace

FlowField compute_flow(const World& current, const World& previous, const RigidTransform& camera_current,
                       const RigidTransform& camera_previous, const Intrinsics& K, const FrameBuffers& buffers) {
    FlowField flow(buffers.width, buffers.height);
    const auto motions = backward_motions(current, previous);
    const RigidTransform prev_from_world = camera_previous.inverse();
    const RigidTransform cur_from_world = camera_current.inverse();

    for (int y = 0; y < buffers.height; ++y) {
        for (int x = 0; x < buffers.width; ++x) {
            const std::size_t i = buffers.index(x, y);
            const std::uint32_t id = buffers.instance[i];
            if (id == 0 || id >= motions.size() || !motions[id].known) continue;
            const float depth = buffers.depth[i];
            if (!std::isfinite(depth)) continue;

            const Vec3 world = camera_current.apply(unproject(K, x + 0.5, y + 0.5, static_cast<double>(depth)));
            // both ends go through the same world-to-pixel arithmetic, so no motion gives exactly zero
            const Vec3 c = cur_from_world.apply(world);
            const Vec3 q = prev_from_world.apply(motions[id].is_static ? world : motions[id].T.apply(world));
            if (q.z() < K.near) continue;
            const double up = K.cx + K.fx * q.x() / q.z();
            const double vp = K.cy + K.fy * q.y() / q.z();
            if (!(up >= 0.0 && up <= K.width && vp >= 0.0 && vp <= K.height)) continue;
            const double uc = K.cx + K.fx * c.x() / c.z();
            const double vc = K.cy + K.fy * c.y() / c.z();

            flow.u[i] = static_cast<float>(uc - up);
            flow.v[i] = static_cast<float>(vc - vp);
            flow.valid[i] = 1;
        }
    }
    return flow;
}

}  // namespace peye
