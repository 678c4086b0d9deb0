// Command-line driver: generate datasets, inspect and reshape them, and score detections.

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "peye/app.hpp"

namespace {

using peye::app::kConfigError;

/// JSON key to option name: underscores become dashes.
std::string option_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number() || v.is_null()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
}

/// Fills options of `sub` from a JSON object. Values already given on the
/// command line are kept.
void apply_json_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const std::string name = option_name(key);
        CLI::Option* opt = sub->get_option_no_throw("--" + name);
        if (opt == nullptr) opt = sub->get_option_no_throw(name);
        if (opt == nullptr || name == "config" || name == "help") {
            throw CLI::ConfigError::Extras("unknown config key '" + key + "'");
        }
        if (opt->count() > 0) continue;
        if (value.is_array()) {
            std::vector<std::string> items;
            for (const auto& v : value) items.push_back(scalar(v));
            opt->add_result(items);
        } else {
            opt->add_result(scalar(value));
        }
        opt->run_callback();
    }
}

struct Command {
    CLI::App* app = nullptr;
    std::string config;
    std::vector<CLI::Option*> required;

    /// Loads the config file, then checks options that may come from either source.
    void finish() {
        if (!config.empty()) apply_json_config(app, config);
        for (CLI::Option* opt : required) {
            if (opt->count() == 0) throw CLI::RequiredError(opt->get_name());
        }
    }
};

/// The command is filled in place because its config string is bound by reference.
void subcommand(Command& c, CLI::App& app, const std::string& name, const std::string& help) {
    c.app = app.add_subcommand(name, help);
    c.app->add_option("--config", c.config, "JSON file with option values; command-line flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic driving-scene dataset generator and VOC evaluation tools", "peye"};
    app.require_subcommand(1);

    peye::app::GenerateConfig gen;
    Command gc;
    subcommand(gc, app, "generate", "Render a dataset with images, depth, instances, classes, flow and VOC boxes");
    auto* g = gc.app;
    g->add_option("--map", gen.map, "OSM XML or layout JSON (default: built-in grid city)");
    g->add_option("--preset", gen.preset, "PE01, PE02 or PE03")->capture_default_str();
    g->add_option("--scenario", gen.scenario, "JSON scenario description instead of a preset");
    gc.required.push_back(g->add_option("-o,--output", gen.output, "Dataset root to create"));
    g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    g->add_option("-n,--frames", gen.frames, "Number of images")->capture_default_str();
    g->add_option("--stride", gen.stride, "Simulation steps between captured frames")->capture_default_str();
    g->add_option("--width", gen.width)->capture_default_str();
    g->add_option("--height", gen.height)->capture_default_str();
    g->add_option("--fov", gen.fov, "Horizontal field of view in degrees")->capture_default_str();
    g->add_option("--draw-distance", gen.draw_distance, "Override the preset's draw distance (m)");
    g->add_option("--weather", gen.weather, "sunny, cloudy, rainy or foggy")->capture_default_str();
    g->add_option("--time-of-day", gen.time_of_day, "Hours in [0, 24)")->capture_default_str();
    g->add_option("--fog-beta", gen.fog_beta, "Fog extinction per metre")->capture_default_str();
    g->add_flag("--culling,!--no-culling", gen.culling, "Frustum culling")->capture_default_str();
    g->add_flag("--lod,!--no-lod", gen.lod, "Distance-based level of detail")->capture_default_str();
    g->add_option("-j,--jobs", gen.jobs, "Worker threads")->capture_default_str();
    g->add_option("--min-visible-pixels", gen.min_visible_pixels)->capture_default_str();
    g->add_option("--min-box-side", gen.min_box_side)->capture_default_str();
    g->add_flag("--overwrite", gen.overwrite, "Replace an existing dataset in the output directory");

    peye::app::StatsConfig stats;
    Command sc;
    subcommand(sc, app, "stats", "Class, size and occlusion statistics of a dataset");
    auto* s = sc.app;
    sc.required.push_back(s->add_option("root", stats.root, "Dataset root"));
    s->add_option("--split", stats.split, "Restrict to ImageSets/Main/<split>.txt");

    peye::app::FilterConfig filter;
    Command fc;
    subcommand(fc, app, "filter", "Remove small or occluded objects; drop images left empty");
    auto* f = fc.app;
    fc.required.push_back(f->add_option("root", filter.root, "Input dataset root"));
    fc.required.push_back(f->add_option("-o,--output", filter.output, "Output dataset root"));
    f->add_option("--min-area", filter.min_area, "Minimum box area in pixels (e.g. 3600)");
    f->add_flag("--fully-visible", filter.fully_visible, "Keep only unoccluded, untruncated objects");
    f->add_flag("--copy-files,!--no-copy-files", filter.copy_files, "Copy per-frame files of kept images");

    peye::app::SplitConfig sp;
    std::string ratio = "3:1";
    Command pc;
    subcommand(pc, app, "split", "Seeded image-level train/test split");
    auto* p = pc.app;
    pc.required.push_back(p->add_option("root", sp.root, "Dataset root"));
    p->add_option("-o,--output", sp.output, "Where to write ImageSets/Main (default: the dataset root)");
    p->add_option("--ratio", ratio, "train:test, e.g. 3:1")->capture_default_str();
    p->add_option("--seed", sp.seed)->capture_default_str();

    peye::app::MixConfig mx;
    Command mc;
    subcommand(mc, app, "mix", "Union of datasets with namespaced image ids");
    auto* m = mc.app;
    mc.required.push_back(m->add_option("inputs", mx.inputs, "name=path or path, one per dataset"));
    mc.required.push_back(m->add_option("-o,--output", mx.output, "Output dataset root"));
    m->add_flag("--copy-files,!--no-copy-files", mx.copy_files, "Copy per-frame files");

    peye::app::SampleConfig sm;
    Command ac;
    subcommand(ac, app, "sample", "Seeded random subset of images");
    auto* a = ac.app;
    ac.required.push_back(a->add_option("root", sm.root, "Input dataset root"));
    ac.required.push_back(a->add_option("-o,--output", sm.output, "Output dataset root"));
    ac.required.push_back(a->add_option("-n,--count", sm.count, "Number of images"));
    a->add_option("--seed", sm.seed)->capture_default_str();
    a->add_flag("--copy-files,!--no-copy-files", sm.copy_files, "Copy per-frame files");

    peye::app::EvalRunConfig ev;
    Command ec;
    subcommand(ec, app, "eval", "VOC average precision and rate-of-descent tables");
    auto* e = ec.app;
    e->add_option("root", ev.root, "Dataset root with ground-truth annotations");
    e->add_option("-d,--detections", ev.detections, "JSON-lines detections");
    e->add_option("--ap-file", ev.ap_file, "Measured APs as a JSON object, instead of detections");
    e->add_option("--reference", ev.reference, "Reference APs as a JSON object; adds a rate-of-descent table");
    e->add_option("--split", ev.split, "Evaluate on ImageSets/Main/<split>.txt only");
    e->add_option("--iou", ev.iou_threshold, "IoU threshold for a true positive")->capture_default_str();
    e->add_option("--ap-mode", ev.ap_mode, "voc2007_11pt or continuous")->capture_default_str();
    e->add_flag("--ignore-difficult,!--count-difficult", ev.ignore_difficult)->capture_default_str();
    e->add_option("--json", ev.json_output, "Write the JSON report here instead of stdout");

    peye::app::BenchConfig bench;
    Command bc;
    subcommand(bc, app, "bench", "Rendering and ground-truth throughput");
    auto* b = bc.app;
    b->add_option("--map", bench.map);
    b->add_option("--preset", bench.preset)->capture_default_str();
    b->add_option("--seed", bench.seed)->capture_default_str();
    b->add_option("-n,--frames", bench.frames)->capture_default_str();
    b->add_option("--width", bench.width)->capture_default_str();
    b->add_option("--height", bench.height)->capture_default_str();
    b->add_flag("--culling,!--no-culling", bench.culling)->capture_default_str();
    b->add_flag("--lod,!--no-lod", bench.lod)->capture_default_str();
    b->add_flag("--verify", bench.verify, "Compare culled against unculled renders");
    b->add_option("--bands", bench.bands, "Horizontal bands rendered in parallel")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kConfigError;
    }

    Command* active = nullptr;
    for (Command* c : {&gc, &sc, &fc, &pc, &mc, &ac, &ec, &bc}) {
        if (c->app->parsed()) active = c;
    }
    try {
        if (active != nullptr) active->finish();
    } catch (const CLI::FileError& ex) {
        std::cerr << "peye: " << ex.what() << "\n";
        return peye::app::kIoError;
    } catch (const CLI::ParseError& ex) {
        std::cerr << "peye: " << ex.what() << "\n";
        return kConfigError;
    }

    auto& out = std::cout;
    auto& err = std::cerr;
    if (*g) return peye::app::run_generate(gen, out, err);
    if (*s) return peye::app::run_stats(stats, out, err);
    if (*f) return peye::app::run_filter(filter, out, err);
    if (*p) {
        const auto colon = ratio.find(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument(ratio);
            sp.train = std::stoi(ratio.substr(0, colon));
            sp.test = std::stoi(ratio.substr(colon + 1));
        } catch (const std::exception&) {
            err << "peye split: ratio must look like 3:1\n";
            return kConfigError;
        }
        return peye::app::run_split(sp, out, err);
    }
    if (*m) return peye::app::run_mix(mx, out, err);
    if (*a) return peye::app::run_sample(sm, out, err);
    if (*e) return peye::app::run_eval(ev, out, err);
    if (*b) return peye::app::run_bench(bench, out, err);
    return kConfigError;
}
