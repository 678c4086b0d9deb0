#include "peye/classes.hpp"

#include <array>

namespace peye {

namespace {

struct ClassEntry {
    std::string_view name;
    Rgb palette;
};

constexpr std::array<ClassEntry, kClassCount> kTable = {{
    {"background", {0, 0, 0}},
    {"car", {0, 0, 142}},
    {"bus", {0, 60, 100}},
    {"truck", {0, 0, 70}},
    {"building", {70, 70, 70}},
    {"road", {128, 64, 128}},
    {"vegetation", {107, 142, 35}},
    {"fence", {190, 153, 153}},
    {"traffic_sign", {220, 220, 0}},
    {"traffic_light", {250, 170, 30}},
    {"ground", {81, 0, 81}},
}};

}  // namespace

std::string_view class_name(ObjectClass c) {
    auto i = static_cast<std::size_t>(c);
    return i < kTable.size() ? kTable[i].name : "unknown";
}

std::optional<ObjectClass> class_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTable.size(); ++i) {
        if (kTable[i].name == name) return static_cast<ObjectClass>(i);
    }
    return std::nullopt;
}

Rgb class_palette_color(ObjectClass c) {
    auto i = static_cast<std::size_t>(c);
    return i < kTable.size() ? kTable[i].palette : Rgb{};
}

}  // namespace peye
