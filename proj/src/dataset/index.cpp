#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "peye/dataset.hpp"
#include "peye/error.hpp"
#include "peye/seed.hpp"

namespace peye {

namespace fs = std::filesystem;

std::size_t DatasetIndex::object_count() const {
    std::size_t n = 0;
    for (const auto& r : images) n += r.objects.size();
    return n;
}

const ImageRecord* DatasetIndex::find(std::string_view id) const {
    for (const auto& r : images) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoFailure, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoFailure, fmt::format("cannot open {} for writing", path.string()));
    out << text;
    if (!out) fail(Errc::IoFailure, fmt::format("cannot write {}", path.string()));
}

/// Keeps images whose id is in `keep`, prunes split lists to match.
DatasetIndex restrict_to(const DatasetIndex& index, const std::unordered_set<std::string>& keep) {
    DatasetIndex out;
    out.root = index.root;
    out.provenance = index.provenance;
    for (const auto& r : index.images) {
        if (keep.count(r.id) != 0) out.images.push_back(r);
    }
    for (const auto& [name, ids] : index.splits) {
        auto& dst = out.splits[name];
        for (const auto& id : ids) {
            if (keep.count(id) != 0) dst.push_back(id);
        }
    }
    return out;
}

template <typename Pred>
DatasetIndex filter_objects(const DatasetIndex& index, Pred keep_object) {
    DatasetIndex out = index;
    out.images.clear();
    std::unordered_set<std::string> kept;
    for (const auto& r : index.images) {
        ImageRecord copy = r;
        copy.objects.clear();
        for (const auto& o : r.objects) {
            if (keep_object(o)) copy.objects.push_back(o);
        }
        if (copy.objects.empty()) continue;
        kept.insert(copy.id);
        out.images.push_back(std::move(copy));
    }
    for (auto& [name, ids] : out.splits) {
        std::erase_if(ids, [&](const std::string& id) { return kept.count(id) == 0; });
    }
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, stream));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;
constexpr std::uint64_t kSampleStream = 0x73616d706c65ULL;

}  // namespace

DatasetIndex load_dataset(const fs::path& root) {
    const fs::path ann = root / "Annotations";
    if (!fs::is_directory(ann)) fail(Errc::IoFailure, fmt::format("{} has no Annotations directory", root.string()));

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(ann)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    DatasetIndex index;
    index.root = root;
    std::set<std::string> seen;
    for (const auto& f : files) {
        ImageRecord r;
        try {
            r = parse_voc_xml(read_text(f));
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("{}: {}", f.string(), e.what()));
        }
        r.id = f.stem().string();
        if (!seen.insert(r.id).second) fail(Errc::InvalidArgument, fmt::format("duplicate image id {}", r.id));
        index.images.push_back(std::move(r));
    }

    const fs::path sets = root / "ImageSets" / "Main";
    if (fs::is_directory(sets)) {
        std::vector<fs::path> lists;
        for (const auto& entry : fs::directory_iterator(sets)) {
            if (entry.is_regular_file() && entry.path().extension() == ".txt") lists.push_back(entry.path());
        }
        std::sort(lists.begin(), lists.end());
        for (const auto& f : lists) {
            std::istringstream in(read_text(f));
            auto& ids = index.splits[f.stem().string()];
            for (std::string line; std::getline(in, line);) {
                // VOC per-class lists carry a trailing flag column
                std::istringstream fields(line);
                std::string id;
                if (!(fields >> id)) continue;
                if (seen.count(id) == 0) {
                    fail(Errc::InvalidArgument, fmt::format("{} lists unknown image id {}", f.string(), id));
                }
                ids.push_back(id);
            }
        }
    }

    const fs::path manifest = root / "manifest.json";
    if (fs::is_regular_file(manifest)) {
        try {
            const auto j = nlohmann::json::parse(read_text(manifest));
            if (j.contains("provenance") && j["provenance"].is_string()) {
                index.provenance = j["provenance"].get<std::string>();
            } else if (j.contains("preset") && j["preset"].is_string()) {
                index.provenance = "generated:" + j["preset"].get<std::string>();
            }
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::IoFailure, fmt::format("{}: {}", manifest.string(), e.what()));
        }
    }
    if (index.provenance.empty()) index.provenance = "imported";
    return index;
}

void save_dataset(const DatasetIndex& index, const fs::path& root, const std::optional<fs::path>& source_root) {
    create_layout(root);
    for (const auto& r : index.images) {
        const FramePaths dst = frame_paths(root, r.id);
        write_text(dst.annotation, write_voc_xml(r));
        if (!source_root) continue;
        const FramePaths src = frame_paths(*source_root, r.id);
        const std::pair<const fs::path*, const fs::path*> pairs[] = {
            {&src.image, &dst.image}, {&src.depth, &dst.depth}, {&src.instance, &dst.instance},
            {&src.cls, &dst.cls},     {&src.flow, &dst.flow}};
        for (const auto& [from, to] : pairs) {
            if (!fs::exists(*from)) continue;
            std::error_code ec;
            fs::copy_file(*from, *to, fs::copy_options::overwrite_existing, ec);
            if (ec) fail(Errc::IoFailure, fmt::format("cannot copy {}: {}", from->string(), ec.message()));
        }
    }
    for (const auto& [name, ids] : index.splits) {
        std::string text;
        for (const auto& id : ids) text += id + "\n";
        write_text(root / "ImageSets" / "Main" / (name + ".txt"), text);
    }
    nlohmann::ordered_json m;
    m["provenance"] = index.provenance;
    m["counts"] = {{"images", index.images.size()}, {"objects", index.object_count()}};
    write_text(root / "manifest.json", m.dump(2) + "\n");
}

DatasetStats compute_stats(const DatasetIndex& index, const ClassThresholds& th) {
    DatasetStats s;
    s.images = index.images.size();
    std::array<std::size_t, 3> occ{};
    bool occ_complete = true;
    for (const auto& r : index.images) {
        ++s.instances_per_image[r.objects.size()];
        for (const auto& o : r.objects) {
            ++s.objects;
            ++s.per_class[o.name];
            ++s.area[static_cast<std::size_t>(classify_area(o.bndbox, th))];
            if (o.occ_rate) {
                ++occ[static_cast<std::size_t>(classify_occlusion(*o.occ_rate, th))];
            } else {
                occ_complete = false;
            }
        }
    }
    if (occ_complete) s.occlusion = occ;
    return s;
}

std::string stats_to_json(const DatasetStats& s) {
    nlohmann::ordered_json j;
    j["images"] = s.images;
    j["objects"] = s.objects;
    j["per_class"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.per_class) j["per_class"][k] = v;
    j["instances_per_image"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.instances_per_image) j["instances_per_image"][std::to_string(k)] = v;
    j["area"] = {{"small", s.area[0]}, {"medium", s.area[1]}, {"large", s.area[2]}};
    if (s.occlusion) {
        j["occlusion"] = {{"slightly", (*s.occlusion)[0]}, {"partly", (*s.occlusion)[1]}, {"largely", (*s.occlusion)[2]}};
    } else {
        j["occlusion"] = nullptr;
    }
    return j.dump(2);
}

DatasetIndex filter_min_area(const DatasetIndex& index, long long min_area) {
    if (min_area <= 0) fail(Errc::InvalidArgument, "min_area must be positive");
    return filter_objects(index, [min_area](const VocObject& o) { return o.bndbox.area() >= min_area; });
}

DatasetIndex filter_fully_visible(const DatasetIndex& index) {
    for (const auto& r : index.images) {
        for (const auto& o : r.objects) {
            if (!o.occ_rate) {
                fail(Errc::MissingOcclusionData, fmt::format("image {} has an object without occ_rate", r.id));
            }
        }
    }
    return filter_objects(index, [](const VocObject& o) { return *o.occ_rate == 0.0 && !o.truncated; });
}

std::size_t split_train_size(std::size_t n, int a, int b) {
    if (a < 1 || b < 1) fail(Errc::InvalidArgument, "split ratio terms must be >= 1");
    const auto A = static_cast<std::uint64_t>(a), B = static_cast<std::uint64_t>(b);
    return static_cast<std::size_t>((2 * n * A + (A + B)) / (2 * (A + B)));
}

std::pair<DatasetIndex, DatasetIndex> split(const DatasetIndex& index, int a, int b, std::uint64_t seed) {
    const std::size_t n = index.images.size();
    const std::size_t k = split_train_size(n, a, b);
    const auto order = shuffled_indices(n, seed, kSplitStream);
    std::unordered_set<std::string> train, test;
    for (std::size_t i = 0; i < n; ++i) (i < k ? train : test).insert(index.images[order[i]].id);
    DatasetIndex tr = restrict_to(index, train), te = restrict_to(index, test);
    tr.splits["train"].clear();
    for (const auto& r : tr.images) tr.splits["train"].push_back(r.id);
    te.splits["test"].clear();
    for (const auto& r : te.images) te.splits["test"].push_back(r.id);
    return {std::move(tr), std::move(te)};
}

DatasetIndex mix(const std::vector<std::pair<std::string, DatasetIndex>>& sources) {
    DatasetIndex out;
    std::set<std::string> namespaces;
    std::vector<std::string> parts;
    for (const auto& [ns, index] : sources) {
        if (ns.empty()) fail(Errc::InvalidArgument, "namespace must not be empty");
        if (!namespaces.insert(ns).second) fail(Errc::DuplicateNamespace, fmt::format("namespace '{}' used twice", ns));
        const std::string prefix = ns + "_";
        for (const auto& r : index.images) {
            ImageRecord copy = r;
            copy.id = prefix + r.id;
            const auto dot = r.filename.rfind('.');
            copy.filename = copy.id + (dot == std::string::npos ? std::string() : r.filename.substr(dot));
            out.images.push_back(std::move(copy));
        }
        for (const auto& [name, ids] : index.splits) {
            auto& dst = out.splits[name];
            for (const auto& id : ids) dst.push_back(prefix + id);
        }
        parts.push_back(fmt::format("{}={}", ns, index.provenance.empty() ? "unknown" : index.provenance));
    }
    out.provenance = fmt::format("mix({})", fmt::join(parts, ","));
    return out;
}

DatasetIndex sample(const DatasetIndex& index, std::size_t n, std::uint64_t seed) {
    if (n > index.images.size()) {
        fail(Errc::SampleTooLarge, fmt::format("cannot sample {} of {} images", n, index.images.size()));
    }
    const auto order = shuffled_indices(index.images.size(), seed, kSampleStream);
    std::unordered_set<std::string> keep;
    for (std::size_t i = 0; i < n; ++i) keep.insert(index.images[order[i]].id);
    return restrict_to(index, keep);
}

}  // namespace peye
