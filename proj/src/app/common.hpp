#pragma once

#include <fmt/format.h>

#include <exception>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "peye/app.hpp"
#include "peye/error.hpp"

namespace peye::app::detail {

/// Runs `body` and turns exceptions into an exit code plus one line on `err`.
template <typename Body>
int guarded(std::string_view command, std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << fmt::format("peye {}: {}\n", command, e.what());
        return exit_code_for(e);
    } catch (const nlohmann::json::exception& e) {
        err << fmt::format("peye {}: invalid JSON: {}\n", command, e.what());
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << fmt::format("peye {}: {}\n", command, e.what());
        return kIoError;
    } catch (const std::bad_alloc&) {
        err << fmt::format("peye {}: out of memory\n", command);
        return kGenerationError;
    }
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoFailure, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoFailure, fmt::format("cannot open {} for writing", path.string()));
    out << text;
    if (!out) fail(Errc::IoFailure, fmt::format("cannot write {}", path.string()));
}

}  // namespace peye::app::detail
