#include <chrono>
#include <cstring>

#include "common.hpp"
#include "peye/dataset.hpp"
#include "peye/eval.hpp"
#include "peye/groundtruth.hpp"
#include "peye/mapio.hpp"
#include "peye/render.hpp"
#include "peye/simd/kernels.hpp"
#include "peye/worldgen.hpp"

namespace peye::app {

using nlohmann::ordered_json;

namespace {

DatasetIndex restrict_to_split(const DatasetIndex& index, const std::string& split_name) {
    const auto it = index.splits.find(split_name);
    if (it == index.splits.end()) {
        fail(Errc::InvalidArgument, fmt::format("{} has no image set '{}'", index.root.string(), split_name));
    }
    DatasetIndex out;
    out.root = index.root;
    out.provenance = index.provenance;
    for (const auto& id : it->second) out.images.push_back(*index.find(id));
    out.splits[split_name] = it->second;
    return out;
}

ordered_json counts_json(const DatasetIndex& index) {
    return {{"images", index.images.size()}, {"objects", index.object_count()}};
}

void check_output(const fs::path& output, const fs::path& input) {
    if (output.empty()) fail(Errc::InvalidArgument, "an output directory is required");
    std::error_code ec;
    if (fs::exists(output) && fs::equivalent(output, input, ec)) {
        fail(Errc::InvalidArgument, "output must differ from the input dataset");
    }
}

std::map<std::string, double> read_ap_map(const fs::path& path) {
    const auto j = nlohmann::json::parse(detail::read_file(path));
    if (!j.is_object()) fail(Errc::InvalidArgument, fmt::format("{} must hold a JSON object of APs", path.string()));
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) out[k] = v.get<double>();
    return out;
}

}  // namespace

int run_stats(const StatsConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("stats", err, [&] {
        DatasetIndex index = load_dataset(cfg.root);
        if (cfg.split) index = restrict_to_split(index, *cfg.split);
        out << stats_to_json(compute_stats(index)) << "\n";
        return kOk;
    });
}

int run_filter(const FilterConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("filter", err, [&] {
        if (!cfg.min_area && !cfg.fully_visible) fail(Errc::InvalidArgument, "choose --min-area and/or --fully-visible");
        check_output(cfg.output, cfg.root);
        const DatasetIndex src = load_dataset(cfg.root);
        DatasetIndex result = src;
        std::vector<std::string> steps;
        if (cfg.min_area) {
            result = filter_min_area(result, *cfg.min_area);
            steps.push_back(fmt::format("min_area={}", *cfg.min_area));
        }
        if (cfg.fully_visible) {
            result = filter_fully_visible(result);
            steps.push_back("fully_visible");
        }
        result.provenance = fmt::format("filter({}) of {}", fmt::join(steps, ","), src.provenance);
        save_dataset(result, cfg.output, cfg.copy_files ? std::optional(cfg.root) : std::nullopt);
        ordered_json j;
        j["input"] = counts_json(src);
        j["output"] = counts_json(result);
        out << j.dump(2) << "\n";
        return kOk;
    });
}

int run_split(const SplitConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("split", err, [&] {
        const DatasetIndex src = load_dataset(cfg.root);
        const auto [train, test] = split(src, cfg.train, cfg.test, cfg.seed);
        const fs::path dst = cfg.output.value_or(cfg.root);
        fs::create_directories(dst / "ImageSets" / "Main");
        for (const auto& [name, part] : {std::pair{"train", &train}, std::pair{"test", &test}}) {
            std::string text;
            for (const auto& r : part->images) text += r.id + "\n";
            detail::write_file(dst / "ImageSets" / "Main" / (std::string(name) + ".txt"), text);
        }
        ordered_json j;
        j["ratio"] = fmt::format("{}:{}", cfg.train, cfg.test);
        j["seed"] = cfg.seed;
        j["train"] = counts_json(train);
        j["test"] = counts_json(test);
        out << j.dump(2) << "\n";
        return kOk;
    });
}

int run_mix(const MixConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("mix", err, [&] {
        if (cfg.inputs.empty()) fail(Errc::InvalidArgument, "mix needs at least one input dataset");
        if (cfg.output.empty()) fail(Errc::InvalidArgument, "an output directory is required");
        std::vector<std::pair<std::string, DatasetIndex>> sources;
        for (const auto& spec : cfg.inputs) {
            const auto eq = spec.find('=');
            const fs::path path = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
            std::string ns = eq == std::string::npos ? path.lexically_normal().filename().string() : spec.substr(0, eq);
            if (ns.empty()) ns = path.lexically_normal().parent_path().filename().string();
            sources.emplace_back(ns, load_dataset(path));
        }
        const DatasetIndex mixed = mix(sources);
        save_dataset(mixed, cfg.output);
        if (cfg.copy_files) {
            for (const auto& [ns, index] : sources) {
                for (const auto& r : index.images) {
                    const FramePaths from = frame_paths(index.root, r.id);
                    const FramePaths to = frame_paths(cfg.output, ns + "_" + r.id);
                    const std::pair<const fs::path*, const fs::path*> files[] = {
                        {&from.image, &to.image}, {&from.depth, &to.depth}, {&from.instance, &to.instance},
                        {&from.cls, &to.cls},     {&from.flow, &to.flow}};
                    for (const auto& [a, b] : files) {
                        if (fs::exists(*a)) fs::copy_file(*a, *b, fs::copy_options::overwrite_existing);
                    }
                }
            }
        }
        ordered_json j;
        j["sources"] = ordered_json::array();
        for (const auto& [ns, index] : sources) j["sources"].push_back({{"namespace", ns}, {"counts", counts_json(index)}});
        j["output"] = counts_json(mixed);
        out << j.dump(2) << "\n";
        return kOk;
    });
}

int run_sample(const SampleConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("sample", err, [&] {
        check_output(cfg.output, cfg.root);
        const DatasetIndex src = load_dataset(cfg.root);
        DatasetIndex picked = sample(src, cfg.count, cfg.seed);
        picked.provenance = fmt::format("sample({}, seed={}) of {}", cfg.count, cfg.seed, src.provenance);
        save_dataset(picked, cfg.output, cfg.copy_files ? std::optional(cfg.root) : std::nullopt);
        ordered_json j;
        j["input"] = counts_json(src);
        j["output"] = counts_json(picked);
        out << j.dump(2) << "\n";
        return kOk;
    });
}

int run_eval(const EvalRunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("eval", err, [&] {
        EvalConfig ec;
        ec.iou_threshold = cfg.iou_threshold;
        ec.ap_mode = ap_mode_from_name(cfg.ap_mode);
        ec.ignore_difficult = cfg.ignore_difficult;
        if (!(ec.iou_threshold > 0.0 && ec.iou_threshold <= 1.0)) fail(Errc::InvalidArgument, "iou must be in (0, 1]");

        EvalReport report;
        report.config = ec;
        std::map<std::string, double> measured;
        if (cfg.detections) {
            if (!cfg.root) fail(Errc::InvalidArgument, "--detections needs a dataset root");
            DatasetIndex index = load_dataset(*cfg.root);
            if (cfg.split) index = restrict_to_split(index, *cfg.split);
            const auto dets = read_detections_jsonl(*cfg.detections);
            report = evaluate(index, dets, ec);
            for (const auto& c : report.classes) {
                if (c.ap) measured[c.cls] = *c.ap;
            }
        } else if (cfg.ap_file) {
            measured = read_ap_map(*cfg.ap_file);
        } else {
            fail(Errc::InvalidArgument, "eval needs --detections or --ap-file");
        }

        std::vector<DescentRow> descent;
        if (cfg.reference) descent = descent_table(read_ap_map(*cfg.reference), measured);
        if (cfg.ap_file && !cfg.detections) {
            for (const auto& [k, v] : measured) report.classes.push_back({k, 0, 0, v});
        }

        const std::string json = report_to_json(report, descent);
        if (cfg.json_output) detail::write_file(*cfg.json_output, json + "\n");
        for (const auto& w : report.warnings) err << "peye eval: warning: " << w << "\n";
        out << report_to_table(report, descent);
        if (!cfg.json_output) out << json << "\n";
        return kOk;
    });
}

int run_bench(const BenchConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded("bench", err, [&] {
        if (cfg.frames == 0) fail(Errc::InvalidArgument, "frame count must be positive");
        const auto preset = preset_by_name(cfg.preset);
        if (!preset) fail(Errc::InvalidArgument, fmt::format("unknown preset '{}'", cfg.preset));
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
        World world = build_world(layout, *preset, rig, cfg.seed);
        const Intrinsics K = intrinsics_from_fov(world.rig.fov_h, world.rig.width, world.rig.height);
        RenderSettings s;
        s.draw_distance = world.rig.draw_distance;
        s.culling = cfg.culling;
        s.lod = cfg.lod;
        s.bands = cfg.bands;
        RenderSettings unculled = s;
        unculled.culling = false;

        using clock = std::chrono::steady_clock;
        double render_s = 0.0, pipeline_s = 0.0;
        std::size_t mismatched = 0, objects = 0;
        for (std::size_t f = 0; f < cfg.frames; ++f) {
            const World prev = world;
            world = step(world, world.dt);
            const std::size_t pass = f % world.rig.yaw_offsets.size();
            const RigidTransform cam = camera_pose(world.rig, world, pass);
            const auto t0 = clock::now();
            FrameBuffers fb = rasterize(world, cam, K, s);
            const auto t1 = clock::now();
            const auto obs = annotate_frame(world, cam, K, s, fb);
            const FlowField flow = compute_flow(world, prev, cam, camera_pose(prev.rig, prev, pass), K, fb);
            apply_weather(fb, s, frame_seed(cfg.seed, f));
            const auto t2 = clock::now();
            render_s += std::chrono::duration<double>(t1 - t0).count();
            pipeline_s += std::chrono::duration<double>(t2 - t0).count();
            objects += obs.size();
            (void)flow;
            if (cfg.verify) {
                const FrameBuffers a = rasterize(world, cam, K, s);
                const FrameBuffers b = rasterize(world, cam, K, unculled);
                if (a.rgb != b.rgb || a.instance != b.instance || a.cls != b.cls ||
                    std::memcmp(a.depth.data(), b.depth.data(), a.depth.size() * sizeof(float)) != 0) {
                    ++mismatched;
                }
            }
        }
        ordered_json j;
        j["preset"] = cfg.preset;
        j["entities"] = world.entities.size();
        j["resolution"] = fmt::format("{}x{}", cfg.width, cfg.height);
        j["frames"] = cfg.frames;
        j["kernels"] = std::string(simd::active_kernels().name);
        j["culling"] = cfg.culling;
        j["lod"] = cfg.lod;
        j["render_fps"] = static_cast<double>(cfg.frames) / render_s;
        j["pipeline_fps"] = static_cast<double>(cfg.frames) / pipeline_s;
        j["objects_per_frame"] = static_cast<double>(objects) / static_cast<double>(cfg.frames);
        if (cfg.verify) j["culling_mismatched_frames"] = mismatched;
        out << j.dump(2) << "\n";
        return cfg.verify && mismatched != 0 ? kGenerationError : kOk;
    });
}

}  // namespace peye::app
