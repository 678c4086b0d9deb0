#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peye {

enum class Errc {
    MalformedXml,
    DanglingNodeRef,
    DegenerateGeometry,
    TriangulationFailure,
    NoRoadSpace,
    BehindCamera,
    EmptyMask,
    FullyOutOfView,
    BoxOutOfBounds,
    IoFailure,
    MissingOcclusionData,
    SampleTooLarge,
    DuplicateNamespace,
    ZeroReference,
    UnknownClass,
    InvalidArgument,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace peye
