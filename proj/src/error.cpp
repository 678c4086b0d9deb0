#include "peye/error.hpp"

#include <string>

namespace peye {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::MalformedXml: return "MalformedXml";
        case Errc::DanglingNodeRef: return "DanglingNodeRef";
        case Errc::DegenerateGeometry: return "DegenerateGeometry";
        case Errc::TriangulationFailure: return "TriangulationFailure";
        case Errc::NoRoadSpace: return "NoRoadSpace";
        case Errc::BehindCamera: return "BehindCamera";
        case Errc::EmptyMask: return "EmptyMask";
        case Errc::FullyOutOfView: return "FullyOutOfView";
        case Errc::BoxOutOfBounds: return "BoxOutOfBounds";
        case Errc::IoFailure: return "IoFailure";
        case Errc::MissingOcclusionData: return "MissingOcclusionData";
        case Errc::SampleTooLarge: return "SampleTooLarge";
        case Errc::DuplicateNamespace: return "DuplicateNamespace";
        case Errc::ZeroReference: return "ZeroReference";
        case Errc::UnknownClass: return "UnknownClass";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace peye
