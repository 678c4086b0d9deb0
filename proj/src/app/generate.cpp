#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "common.hpp"
#include "peye/dataset.hpp"
#include "peye/groundtruth.hpp"
#include "peye/mapio.hpp"
#include "peye/render.hpp"
#include "peye/worldgen.hpp"

namespace peye::app {

using nlohmann::ordered_json;

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::IoFailure:
        case Errc::MalformedXml:
        case Errc::DanglingNodeRef:
        case Errc::BoxOutOfBounds:
            return kIoError;
        case Errc::DegenerateGeometry:
        case Errc::TriangulationFailure:
        case Errc::NoRoadSpace:
        case Errc::BehindCamera:
        case Errc::EmptyMask:
        case Errc::FullyOutOfView:
            return kGenerationError;
        case Errc::MissingOcclusionData:
        case Errc::SampleTooLarge:
        case Errc::DuplicateNamespace:
        case Errc::ZeroReference:
        case Errc::UnknownClass:
        case Errc::InvalidArgument:
            return kConfigError;
    }
    return kGenerationError;
}

namespace {

ScenarioPreset scenario_from_json(const nlohmann::json& j) {
    ScenarioPreset p;
    if (j.contains("base")) {
        const auto base = preset_by_name(j["base"].get<std::string>());
        if (!base) fail(Errc::InvalidArgument, fmt::format("unknown base preset '{}'", j["base"].get<std::string>()));
        p = *base;
    }
    p.name = j.value("name", j.contains("base") ? p.name : std::string("custom"));
    if (j.contains("yaw_offsets_deg")) {
        p.yaw_offsets.clear();
        for (const auto& v : j["yaw_offsets_deg"]) p.yaw_offsets.push_back(deg2rad(v.get<double>()));
    }
    if (j.contains("density")) {
        const auto d = j["density"].get<std::string>();
        if (d == "sparse") {
            p.density = TrafficDensity::Sparse;
        } else if (d == "dense") {
            p.density = TrafficDensity::Dense;
        } else {
            fail(Errc::InvalidArgument, fmt::format("density must be sparse or dense, got '{}'", d));
        }
    }
    p.per_frame_color_change = j.value("per_frame_color_change", p.per_frame_color_change);
    p.rotate_vehicles = j.value("rotate_vehicles", p.rotate_vehicles);
    p.draw_distance = j.value("draw_distance", p.draw_distance);
    return p;
}

struct FrameJob {
    std::size_t index = 0;
    std::size_t pass = 0;
    World previous;
    World current;
};

struct FrameResult {
    std::size_t objects = 0;
    std::map<std::string, std::size_t> per_class;
    std::exception_ptr error;
};

std::string frame_id(std::size_t index) { return fmt::format("{:06d}", index); }

void clear_output(const fs::path& root) {
    for (const char* sub : {"JPEGImages", "Annotations", "Depth", "Instance", "Class", "Flow", "ImageSets"}) {
        fs::remove_all(root / sub);
    }
    fs::remove(root / "manifest.json");
}

}  // namespace

int run_generate(const GenerateConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("generate", err, [&]() -> int {
        if (cfg.output.empty()) fail(Errc::InvalidArgument, "an output directory is required");
        if (cfg.frames == 0) fail(Errc::InvalidArgument, "frame count must be positive");
        if (cfg.stride < 1) fail(Errc::InvalidArgument, "stride must be >= 1");
        if (cfg.jobs < 1) fail(Errc::InvalidArgument, "jobs must be >= 1");
        if (cfg.width < 16 || cfg.height < 16) fail(Errc::InvalidArgument, "resolution must be at least 16x16");

        ScenarioPreset preset;
        if (cfg.scenario) {
            preset = scenario_from_json(nlohmann::json::parse(detail::read_file(*cfg.scenario)));
        } else {
            const auto p = preset_by_name(cfg.preset);
            if (!p) fail(Errc::InvalidArgument, fmt::format("unknown preset '{}' (expected PE01, PE02 or PE03)", cfg.preset));
            preset = *p;
        }
        if (cfg.draw_distance) preset.draw_distance = *cfg.draw_distance;

        RenderSettings settings;
        settings.weather = weather_from_name(cfg.weather);
        settings.time_of_day = cfg.time_of_day;
        settings.fog_beta = cfg.fog_beta;
        settings.draw_distance = preset.draw_distance;
        settings.culling = cfg.culling;
        settings.lod = cfg.lod;
        if (!(cfg.time_of_day >= 0.0 && cfg.time_of_day < 24.0)) fail(Errc::InvalidArgument, "time_of_day must be in [0, 24)");

        AnnotationOptions annot;
        annot.min_visible_pixels = cfg.min_visible_pixels;
        annot.min_box_side = cfg.min_box_side;

        Layout layout;
        if (cfg.map) {
            if (!fs::exists(*cfg.map)) fail(Errc::IoFailure, fmt::format("map file {} does not exist", cfg.map->string()));
            layout = load_layout_file(*cfg.map);
        } else {
            layout = synthetic_city({}, cfg.seed);
        }

        CameraRig rig;
        rig.width = cfg.width;
        rig.height = cfg.height;
        rig.fov_h = cfg.fov;
        const World base = build_world(layout, preset, rig, cfg.seed);
        const Intrinsics K = intrinsics_from_fov(base.rig.fov_h, base.rig.width, base.rig.height);

        if (fs::exists(cfg.output) && !fs::is_empty(cfg.output)) {
            if (!cfg.overwrite) {
                fail(Errc::InvalidArgument,
                     fmt::format("output {} is not empty (pass --overwrite to replace a dataset)", cfg.output.string()));
            }
            clear_output(cfg.output);
        }
        create_layout(cfg.output);

        const std::size_t passes = base.rig.yaw_offsets.size();
        std::vector<std::size_t> pass_of;
        std::vector<std::size_t> step_in_pass;
        for (std::size_t p = 0; p < passes; ++p) {
            const std::size_t n = cfg.frames / passes + (p < cfg.frames % passes ? 1 : 0);
            for (std::size_t j = 0; j < n; ++j) {
                pass_of.push_back(p);
                step_in_pass.push_back(j);
            }
        }

        std::vector<FrameResult> results(cfg.frames);
        const auto t0 = std::chrono::steady_clock::now();

        auto process = [&](const FrameJob& job) {
            FrameResult& res = results[job.index];
            try {
                const RigidTransform cam = camera_pose(job.current.rig, job.current, job.pass);
                const RigidTransform cam_prev = camera_pose(job.previous.rig, job.previous, job.pass);
                FrameBuffers fb = rasterize(job.current, cam, K, settings);
                const auto obs = annotate_frame(job.current, cam, K, settings, fb, annot);
                const FlowField flow = compute_flow(job.current, job.previous, cam, cam_prev, K, fb);
                apply_weather(fb, settings, frame_seed(cfg.seed, job.index));

                ImageRecord rec;
                rec.id = frame_id(job.index);
                rec.filename = rec.id + ".png";
                rec.width = fb.width;
                rec.height = fb.height;
                for (const auto& o : obs) {
                    rec.objects.push_back(to_voc_object(o));
                    ++res.per_class[rec.objects.back().name];
                }
                res.objects = rec.objects.size();
                write_frame_outputs(fb, flow, rec, frame_paths(cfg.output, rec.id));
            } catch (...) {
                res.error = std::current_exception();
            }
        };

        // Snapshots are produced sequentially in chunks so memory stays bounded;
        // frames inside a chunk are independent and go to the worker pool.
        const std::size_t chunk = std::max<std::size_t>(16, static_cast<std::size_t>(cfg.jobs) * 4);
        std::vector<World> pass_world(passes, base);
        std::vector<std::size_t> pass_steps(passes, 0);
        for (std::size_t begin = 0; begin < cfg.frames; begin += chunk) {
            const std::size_t end = std::min(cfg.frames, begin + chunk);
            std::vector<FrameJob> jobs;
            for (std::size_t i = begin; i < end; ++i) {
                const std::size_t p = pass_of[i];
                const std::size_t target = step_in_pass[i] * static_cast<std::size_t>(cfg.stride);
                while (pass_steps[p] < target) {
                    pass_world[p] = step(pass_world[p], base.dt);
                    ++pass_steps[p];
                }
                FrameJob job;
                job.index = i;
                job.pass = p;
                job.previous = pass_world[p];
                job.current = step(pass_world[p], base.dt);
                jobs.push_back(std::move(job));
            }
            if (cfg.jobs == 1) {
                for (const auto& j : jobs) process(j);
            } else {
                std::atomic<std::size_t> next{0};
                std::vector<std::jthread> pool;
                const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), jobs.size());
                for (std::size_t w = 0; w < workers; ++w) {
                    pool.emplace_back([&] {
                        for (std::size_t k = next++; k < jobs.size(); k = next++) process(jobs[k]);
                    });
                }
            }
            for (std::size_t i = begin; i < end; ++i) {
                if (results[i].error) std::rethrow_exception(results[i].error);
            }
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::string all;
        std::size_t total = 0;
        std::map<std::string, std::size_t> per_class;
        for (std::size_t i = 0; i < cfg.frames; ++i) {
            all += frame_id(i) + "\n";
            total += results[i].objects;
            for (const auto& [k, v] : results[i].per_class) per_class[k] += v;
        }
        detail::write_file(cfg.output / "ImageSets" / "Main" / "all.txt", all);

        ordered_json m;
        m["format"] = "peye-dataset-1";
        m["provenance"] = "generated:" + preset.name;
        m["preset"] = preset.name;
        m["seed"] = cfg.seed;
        m["frame_count"] = cfg.frames;
        m["counts"] = {{"images", cfg.frames},
                       {"objects", total},
                       {"per_class", per_class},
                       {"mean_objects_per_image", static_cast<double>(total) / static_cast<double>(cfg.frames)}};
        ordered_json echo;
        echo["map"] = cfg.map ? cfg.map->string() : std::string("synthetic_city");
        echo["preset"] = preset.name;
        echo["yaw_offsets_deg"] = ordered_json::array();
        for (double y : preset.yaw_offsets) echo["yaw_offsets_deg"].push_back(rad2deg(y));
        echo["density"] = preset.density == TrafficDensity::Dense ? "dense" : "sparse";
        echo["rotate_vehicles"] = preset.rotate_vehicles;
        echo["per_frame_color_change"] = preset.per_frame_color_change;
        echo["draw_distance"] = preset.draw_distance;
        echo["frames"] = cfg.frames;
        echo["stride"] = cfg.stride;
        echo["width"] = cfg.width;
        echo["height"] = cfg.height;
        echo["fov"] = cfg.fov;
        echo["weather"] = std::string(weather_name(settings.weather));
        echo["time_of_day"] = cfg.time_of_day;
        echo["fog_beta"] = cfg.fog_beta;
        echo["culling"] = cfg.culling;
        echo["lod"] = cfg.lod;
        echo["min_visible_pixels"] = cfg.min_visible_pixels;
        echo["min_box_side"] = cfg.min_box_side;
        m["config"] = echo;
        m["world"] = ordered_json::parse(world_manifest_json(base));
        m["warnings"] = base.warnings;
        m["timing"] = {{"seconds", seconds}, {"frames_per_second", static_cast<double>(cfg.frames) / seconds}};
        detail::write_file(cfg.output / "manifest.json", m.dump(2) + "\n");

        out << m.dump(2) << "\n";
        return kOk;
    });
}

}  // namespace peye::app
