#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace peye {

/// Semantic classes. The numeric value is what lands in the class buffer and
/// the indexed class PNG, so the order is part of the on-disk format.
enum class ObjectClass : std::uint16_t {
    Background = 0,
    Car = 1,
    Bus = 2,
    Truck = 3,
    Building = 4,
    Road = 5,
    Vegetation = 6,
    Fence = 7,
    TrafficSign = 8,
    TrafficLight = 9,
    Ground = 10,
};

inline constexpr std::size_t kClassCount = 11;

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

std::string_view class_name(ObjectClass c);
std::optional<ObjectClass> class_from_name(std::string_view name);

/// Palette entry used for the indexed segmentation PNG.
Rgb class_palette_color(ObjectClass c);

constexpr bool is_vehicle(ObjectClass c) {
    return c == ObjectClass::Car || c == ObjectClass::Bus || c == ObjectClass::Truck;
}

/// Annotated detection classes, in table order.
inline constexpr std::array<ObjectClass, 3> kVehicleClasses = {ObjectClass::Car, ObjectClass::Bus,
                                                              ObjectClass::Truck};

}  // namespace peye
