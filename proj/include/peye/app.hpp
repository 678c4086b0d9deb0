#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "peye/seed.hpp"

namespace peye {
class Error;
}

namespace peye::app {

namespace fs = std::filesystem;

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2, kGenerationError = 3 };

int exit_code_for(const Error& e);

struct GenerateConfig {
    std::optional<fs::path> map;       ///< OSM or layout JSON; synthetic city when absent
    std::string preset = "PE01";
    std::optional<fs::path> scenario;  ///< JSON preset, overrides `preset`
    fs::path output;
    std::uint64_t seed = kDefaultSeed;
    std::size_t frames = 10;
    int stride = 5;  ///< simulation steps between captured frames
    int width = 640;
    int height = 480;
    double fov = 60.0;
    std::optional<double> draw_distance;
    std::string weather = "sunny";
    double time_of_day = 12.0;
    double fog_beta = 0.008;
    bool culling = true;
    bool lod = false;
    int jobs = 1;
    std::size_t min_visible_pixels = 20;
    int min_box_side = 2;
    bool overwrite = false;
};

struct StatsConfig {
    fs::path root;
    std::optional<std::string> split;
};

struct FilterConfig {
    fs::path root;
    fs::path output;
    std::optional<long long> min_area;
    bool fully_visible = false;
    bool copy_files = true;
};

struct SplitConfig {
    fs::path root;
    std::optional<fs::path> output;  ///< defaults to writing ImageSets under root
    int train = 3;
    int test = 1;
    std::uint64_t seed = kDefaultSeed;
};

struct MixConfig {
    std::vector<std::string> inputs;  ///< "name=path" or a bare path named by its directory
    fs::path output;
    bool copy_files = true;
};

struct SampleConfig {
    fs::path root;
    fs::path output;
    std::size_t count = 0;
    std::uint64_t seed = kDefaultSeed;
    bool copy_files = true;
};

struct EvalRunConfig {
    std::optional<fs::path> root;
    std::optional<fs::path> detections;
    std::optional<fs::path> ap_file;    ///< measured APs as {"key": ap}, instead of detections
    std::optional<fs::path> reference;  ///< reference APs as {"key": ap}
    std::optional<std::string> split;
    double iou_threshold = 0.5;
    std::string ap_mode = "voc2007_11pt";
    bool ignore_difficult = true;
    std::optional<fs::path> json_output;
};

struct BenchConfig {
    std::optional<fs::path> map;
    std::string preset = "PE01";
    std::uint64_t seed = kDefaultSeed;
    std::size_t frames = 60;
    int width = 640;
    int height = 480;
    bool culling = true;
    bool lod = false;
    bool verify = false;  ///< also render unculled and compare buffers
    int bands = 1;
};

/// Each returns an ExitCode, prints its JSON report on `out` and a one-line
/// diagnostic on `err` when it fails.
int run_generate(const GenerateConfig& config, std::ostream& out, std::ostream& err);
int run_stats(const StatsConfig& config, std::ostream& out, std::ostream& err);
int run_filter(const FilterConfig& config, std::ostream& out, std::ostream& err);
int run_split(const SplitConfig& config, std::ostream& out, std::ostream& err);
int run_mix(const MixConfig& config, std::ostream& out, std::ostream& err);
int run_sample(const SampleConfig& config, std::ostream& out, std::ostream& err);
int run_eval(const EvalRunConfig& config, std::ostream& out, std::ostream& err);
int run_bench(const BenchConfig& config, std::ostream& out, std::ostream& err);

}  // namespace peye::app
