#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "peye/error.hpp"
#include "peye/groundtruth.hpp"
#include "scenes.hpp"

using namespace peye;

namespace {

World world_of(std::vector<Entity> entities) {
    World w;
    w.entities = std::move(entities);
    return w;
}

RenderSettings flat() {
    RenderSettings s;
    s.weather = Weather::Cloudy;
    s.draw_distance = 1000.0;
    return s;
}

World city(std::uint64_t seed) {
    CityOptions opt;
    opt.blocks_x = 2;
    opt.blocks_y = 2;
    CameraRig rig;
    rig.width = 200;
    rig.height = 150;
    return build_world(synthetic_city(opt, seed), *preset_by_name("PE01"), rig, seed);
}

}  // namespace

TEST_CASE("instance masks agree with a per-id scan") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int W = 1 + static_cast<int>(rng.below(30)), H = 1 + static_cast<int>(rng.below(30));
        FrameBuffers fb(W, H);
        const auto ids = 1 + rng.below(6);
        for (auto& v : fb.instance) v = rng.below(3) == 0 ? 0 : static_cast<std::uint32_t>(1 + rng.below(ids));
        const auto got = instance_masks(fb);
        const auto ref = oracle::scan_masks(fb.instance, W, H);
        REQUIRE(got.size() == ref.size());
        for (const auto& [id, e] : ref) {
            REQUIRE(got.count(id) == 1);
            const auto& g = got.at(id);
            CHECK(g.count == e.count);
            CHECK(g.col_min == e.col_min);
            CHECK(g.col_max == e.col_max);
            CHECK(g.row_min == e.row_min);
            CHECK(g.row_max == e.row_max);
            // the 1-based box always contains every mask pixel and stays in the image
            const VocBox b = tight_bbox(g);
            CHECK(b.xmin >= 1);
            CHECK(b.ymin >= 1);
            CHECK(b.xmax <= W);
            CHECK(b.ymax <= H);
            CHECK(b.area() >= static_cast<long long>(g.count));
        }
    }
}

TEST_CASE("tight box is 1-based and inclusive") {
    MaskExtent e;
    e.count = 12;
    e.col_min = 0;
    e.col_max = 9;
    e.row_min = 5;
    e.row_max = 7;
    const VocBox b = tight_bbox(e);
    CHECK(b == VocBox{1, 6, 10, 8});
    CHECK(b.width() == 10);
    CHECK(b.height() == 3);
    try {
        tight_bbox(MaskExtent{});
        FAIL("expected EmptyMask");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::EmptyMask);
    }
}

TEST_CASE("occlusion rate examples") {
    const Intrinsics K = intrinsics_from_fov(90.0, 256, 256);
    const Entity target = test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-2, -2, 2, 2, 20));
    // occluder at half the distance hides everything left of x = 0 on the target plane
    const Entity half = test::entity_from_triangles(2, ObjectClass::Car, test::facing_quad(-5, -5, 0, 5, 10));
    const Entity full = test::entity_from_triangles(2, ObjectClass::Car, test::facing_quad(-5, -5, 5, 5, 10));

    const World lone = world_of({target});
    CHECK(occlusion_rate(lone, test::identity_camera(), K, flat(), 1) == 0.0);

    const World halved = world_of({target, half});
    const double side = 4.0 * K.fx / 20.0;
    CHECK(std::abs(occlusion_rate(halved, test::identity_camera(), K, flat(), 1) - 0.5) <= 2.0 / side);

    const World covered = world_of({target, full});
    CHECK(occlusion_rate(covered, test::identity_camera(), K, flat(), 1) == 1.0);

    const World away = world_of({test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-2, -2, 2, 2, -20))});
    try {
        occlusion_rate(away, test::identity_camera(), K, flat(), 1);
        FAIL("expected FullyOutOfView");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::FullyOutOfView);
    }
}

TEST_CASE("occlusion rate stays in [0, 1] on generated scenes") {
    World w = city(8);
    const Intrinsics K = intrinsics_from_fov(w.rig.fov_h, w.rig.width, w.rig.height);
    RenderSettings s;
    s.draw_distance = w.rig.draw_distance;
    for (std::size_t cam = 0; cam < w.rig.yaw_offsets.size(); ++cam) {
        const RigidTransform pose = camera_pose(w.rig, w, cam);
        const FrameBuffers fb = rasterize(w, pose, K, s);
        for (const auto& obs : annotate_frame(w, pose, K, s, fb)) {
            CHECK(obs.occlusion_rate >= 0.0);
            CHECK(obs.occlusion_rate <= 1.0);
            CHECK(obs.visible_pixels <= obs.solo_pixels);
            // the visible box sits inside the full box
            CHECK(obs.bbox_full.xmin <= obs.bbox_visible.xmin);
            CHECK(obs.bbox_full.ymin <= obs.bbox_visible.ymin);
            CHECK(obs.bbox_full.xmax >= obs.bbox_visible.xmax);
            CHECK(obs.bbox_full.ymax >= obs.bbox_visible.ymax);
        }
    }
}

TEST_CASE("truncation flag") {
    const Intrinsics K = intrinsics_from_fov(90.0, 64, 64);  // fx = 32, centre 32
    const auto flag = [&](const Entity& e) { return truncation_flag(world_of({e}), test::identity_camera(), K, 1); };
    CHECK_FALSE(flag(test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-2, -2, 2, 2, 10))));
    // right edge projects to u = 32 + 32 * 15 / 10 = 80, past the image
    CHECK(flag(test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-2, -2, 15, 2, 10))));
    // right edge projects exactly to u = W, beyond the last pixel centre
    CHECK(flag(test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-2, -2, 10, 2, 10))));
    // right edge just inside the last pixel centre u = W - 0.5
    CHECK_FALSE(flag(test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-2, -2, 9.84, 2, 10))));
    // straddles the near plane
    const std::vector<std::array<Vec3, 3>> cross{{Vec3(0, 0, 0.1), Vec3(0, 1, 5), Vec3(1, 0, 5)}};
    CHECK(flag(test::entity_from_triangles(1, ObjectClass::Car, cross)));
}

TEST_CASE("flow of a static scene with a static camera is zero") {
    const Intrinsics K = intrinsics_from_fov(90.0, 64, 48);
    const World w = world_of({test::entity_from_triangles(1, ObjectClass::Building, test::facing_quad(-5, -5, 5, 5, 10))});
    const FrameBuffers fb = rasterize(w, test::identity_camera(), K, flat());
    const FlowField f = compute_flow(w, w, test::identity_camera(), test::identity_camera(), K, fb);
    std::size_t valid = 0;
    for (std::size_t i = 0; i < fb.pixel_count(); ++i) {
        CHECK(f.valid[i] == (fb.instance[i] != 0 ? 1 : 0));
        if (f.valid[i]) {
            ++valid;
            CHECK(f.u[i] == 0.0f);
            CHECK(f.v[i] == 0.0f);
        }
    }
    CHECK(valid > 0);
}

TEST_CASE("flow from camera translation is fx * delta / z") {
    const Intrinsics K = intrinsics_from_fov(90.0, 64, 48);
    const World w = world_of({test::entity_from_triangles(1, ObjectClass::Building, test::facing_quad(-8, -8, 8, 8, 10))});
    RigidTransform prev_cam;
    prev_cam.t = Vec3(-0.5, 0, 0);  // the camera has since moved 0.5 m to the right
    const FrameBuffers fb = rasterize(w, test::identity_camera(), K, flat());
    const FlowField f = compute_flow(w, w, test::identity_camera(), prev_cam, K, fb);
    const std::size_t c = fb.index(32, 24);
    REQUIRE(f.valid[c] == 1);
    CHECK(f.u[c] == doctest::Approx(-K.fx * 0.5 / 10.0).epsilon(1e-6));
    CHECK(f.v[c] == doctest::Approx(0.0));
}

TEST_CASE("flow from object motion and invalid sources") {
    const Intrinsics K = intrinsics_from_fov(90.0, 64, 48);
    Entity moved = test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-3, -3, 3, 3, 10));
    Entity before = moved;
    moved.pose.position = Vec3(1.0, 0.0, 0.0);
    const World cur = world_of({moved});
    const World prev = world_of({before});
    const FrameBuffers fb = rasterize(cur, test::identity_camera(), K, flat());
    const FlowField f = compute_flow(cur, prev, test::identity_camera(), test::identity_camera(), K, fb);
    const std::size_t c = fb.index(34, 24);
    REQUIRE(fb.instance[c] == 1);
    REQUIRE(f.valid[c] == 1);
    CHECK(f.u[c] == doctest::Approx(K.fx * 1.0 / 10.0).epsilon(1e-6));

    // entity absent from the previous world
    const FlowField none = compute_flow(cur, World{}, test::identity_camera(), test::identity_camera(), K, fb);
    CHECK(std::all_of(none.valid.begin(), none.valid.end(), [](auto v) { return v == 0; }));

    // source point behind the previous camera
    RigidTransform far_ahead;
    far_ahead.t = Vec3(0, 0, 20);
    const FlowField behind = compute_flow(cur, prev, test::identity_camera(), far_ahead, K, fb);
    CHECK(std::all_of(behind.valid.begin(), behind.valid.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("flow warps current pixels onto the same instance in the previous frame") {
    World prev = city(12);
    for (int i = 0; i < 4; ++i) prev = step(prev, 0.1);
    const World cur = step(prev, 0.1);
    const Intrinsics K = intrinsics_from_fov(cur.rig.fov_h, cur.rig.width, cur.rig.height);
    RenderSettings s;
    s.draw_distance = cur.rig.draw_distance;
    std::size_t checked = 0, agree = 0;
    for (std::size_t cam = 0; cam < cur.rig.yaw_offsets.size(); ++cam) {
        const RigidTransform pc = camera_pose(cur.rig, cur, cam), pp = camera_pose(prev.rig, prev, cam);
        const FrameBuffers fc = rasterize(cur, pc, K, s), fp = rasterize(prev, pp, K, s);
        const FlowField f = compute_flow(cur, prev, pc, pp, K, fc);
        for (int y = 0; y < K.height; ++y) {
            for (int x = 0; x < K.width; ++x) {
                const auto i = fc.index(x, y);
                if (!f.valid[i]) continue;
                const double xp = x + 0.5 - f.u[i], yp = y + 0.5 - f.v[i];
                bool hit = false;
                for (int dy = -1; dy <= 1 && !hit; ++dy) {
                    for (int dx = -1; dx <= 1 && !hit; ++dx) {
                        const int qx = static_cast<int>(std::floor(xp)) + dx, qy = static_cast<int>(std::floor(yp)) + dy;
                        if (qx < 0 || qy < 0 || qx >= K.width || qy >= K.height) continue;
                        hit = fp.instance[fp.index(qx, qy)] == fc.instance[i];
                    }
                }
                ++checked;
                agree += hit ? 1 : 0;
            }
        }
    }
    REQUIRE(checked > 10000);
    // disagreement is limited to pixels disoccluded between the two frames
    CHECK(static_cast<double>(agree) / static_cast<double>(checked) > 0.97);
}

TEST_CASE("area and occlusion classes at their boundaries") {
    CHECK(classify_area(VocBox{1, 1, 32, 31}) == AreaClass::Small);
    CHECK(classify_area(VocBox{1, 1, 32, 32}) == AreaClass::Medium);
    CHECK(classify_area(VocBox{1, 1, 96, 96}) == AreaClass::Medium);
    CHECK(classify_area(VocBox{1, 1, 96, 97}) == AreaClass::Large);
    CHECK(classify_occlusion(0.0) == OcclusionClass::Slightly);
    CHECK(classify_occlusion(0.0999) == OcclusionClass::Slightly);
    CHECK(classify_occlusion(0.1) == OcclusionClass::Partly);
    CHECK(classify_occlusion(0.35) == OcclusionClass::Partly);
    CHECK(classify_occlusion(0.3501) == OcclusionClass::Largely);
    CHECK(area_class_name(AreaClass::Large) == "large");
    CHECK(occlusion_class_name(OcclusionClass::Partly) == "partly");
}

TEST_CASE("annotation keeps visible vehicles only") {
    const Intrinsics K = intrinsics_from_fov(90.0, 128, 96);  // fx = 64
    const World w = world_of({
        test::entity_from_triangles(1, ObjectClass::Car, test::facing_quad(-2, -1, 2, 1, 10)),
        test::entity_from_triangles(2, ObjectClass::Building, test::facing_quad(-8, -8, 8, 8, 30)),
        // roughly 3 x 3 pixels: below the pixel floor
        test::entity_from_triangles(3, ObjectClass::Bus, test::facing_quad(3, 0, 3.45, 0.45, 10)),
        // one pixel wide but tall: box side below the floor
        test::entity_from_triangles(4, ObjectClass::Truck, test::facing_quad(-4.1, -3, -3.95, 3, 10)),
        // bus partly hidden behind the car
        test::entity_from_triangles(5, ObjectClass::Bus, test::facing_quad(-1, -3, 3, 0, 15)),
    });
    const FrameBuffers fb = rasterize(w, test::identity_camera(), K, flat());
    const auto obs = annotate_frame(w, test::identity_camera(), K, flat(), fb);
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].id == 1);
    CHECK(obs[0].cls == ObjectClass::Car);
    CHECK(obs[0].occlusion_rate == 0.0);
    CHECK_FALSE(obs[0].truncated);
    CHECK(obs[0].bbox_visible == obs[0].bbox_full);
    CHECK(obs[1].id == 5);
    CHECK(obs[1].occlusion_rate > 0.0);
    CHECK(obs[1].bbox_full.ymax > obs[1].bbox_visible.ymax - 1);
    CHECK(obs[1].bbox_full.area() >= obs[1].bbox_visible.area());
    for (const auto& o : obs) CHECK(o.visible_pixels >= 20);
}

TEST_CASE("depth equals the ray-plane distance on the ground") {
    CityOptions opt;
    opt.blocks_x = 1;
    opt.blocks_y = 1;
    CameraRig rig;
    rig.width = 160;
    rig.height = 120;
    const World w = build_world(synthetic_city(opt, 3), *preset_by_name("PE03"), rig, 3);
    const Intrinsics K = intrinsics_from_fov(rig.fov_h, rig.width, rig.height);
    const RigidTransform pose = camera_pose(w.rig, w, 0);
    RenderSettings s;
    s.draw_distance = w.rig.draw_distance;
    const FrameBuffers fb = rasterize(w, pose, K, s);
    std::size_t checked = 0;
    for (int y = 0; y < K.height; ++y) {
        for (int x = 0; x < K.width; ++x) {
            const auto i = fb.index(x, y);
            const auto cls = static_cast<ObjectClass>(fb.cls[i]);
            if (cls != ObjectClass::Road && cls != ObjectClass::Ground) continue;
            const Vec3 d_cam((x + 0.5 - K.cx) / K.fx, (y + 0.5 - K.cy) / K.fy, 1.0);
            const Vec3 d = pose.R * d_cam;
            if (d.z() >= 0) continue;
            const double plane = cls == ObjectClass::Road ? 0.0 : -0.02;
            const double z = (plane - pose.t.z()) / d.z();  // z_cam equals the ray parameter for d_cam.z = 1
            CHECK(fb.depth[i] == doctest::Approx(z).epsilon(1e-5));
            ++checked;
        }
    }
    CHECK(checked > 1000);
}
