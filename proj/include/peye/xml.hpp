#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace peye::xml {

/// Minimal DOM: enough for OSM and VOC documents. Text is the concatenated
/// character data directly inside the element (not its descendants).
struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;
    std::string text;
    long line = 0;

    const std::string* attribute(std::string_view key) const;
    const Element* child(std::string_view child_name) const;
    /// Text of the named child with surrounding whitespace trimmed; nullptr if absent.
    std::string child_text(std::string_view child_name, bool* found = nullptr) const;
};

/// Parses a complete document and returns its root element.
/// Throws Error(MalformedXml) with the line number on any syntax error.
Element parse(std::string_view document);

std::string escape(std::string_view raw);

std::string_view trim(std::string_view s);

}  // namespace peye::xml
