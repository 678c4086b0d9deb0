#include "peye/xml.hpp"

#include <expat.h>
#include <fmt/format.h>

#include <limits>
#include <memory>

#include "peye/error.hpp"

namespace peye::xml {

const std::string* Element::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
        if (k == key) return &v;
    }
    return nullptr;
}

const Element* Element::child(std::string_view child_name) const {
    for (const auto& c : children) {
        if (c.name == child_name) return &c;
    }
    return nullptr;
}

std::string Element::child_text(std::string_view child_name, bool* found) const {
    const Element* c = child(child_name);
    if (found) *found = c != nullptr;
    return c ? std::string(trim(c->text)) : std::string();
}

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::string escape(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

struct BuildState {
    XML_Parser parser = nullptr;
    std::vector<Element> stack;
    Element root;
    bool have_root = false;
};

void on_start(void* user, const XML_Char* name, const XML_Char** atts) {
    auto* st = static_cast<BuildState*>(user);
    Element e;
    e.name = name;
    e.line = static_cast<long>(XML_GetCurrentLineNumber(st->parser));
    for (int i = 0; atts[i] != nullptr; i += 2) e.attributes.emplace_back(atts[i], atts[i + 1]);
    st->stack.push_back(std::move(e));
}

void on_end(void* user, const XML_Char*) {
    auto* st = static_cast<BuildState*>(user);
    Element done = std::move(st->stack.back());
    st->stack.pop_back();
    if (st->stack.empty()) {
        st->root = std::move(done);
        st->have_root = true;
    } else {
        st->stack.back().children.push_back(std::move(done));
    }
}

void on_text(void* user, const XML_Char* s, int len) {
    auto* st = static_cast<BuildState*>(user);
    if (!st->stack.empty()) st->stack.back().text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

Element parse(std::string_view document) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) fail(Errc::MalformedXml, "cannot allocate XML parser");

    BuildState st;
    st.parser = parser.get();
    XML_SetUserData(parser.get(), &st);
    XML_SetElementHandler(parser.get(), &on_start, &on_end);
    XML_SetCharacterDataHandler(parser.get(), &on_text);

    // expat takes an int length; feed large inputs in chunks
    constexpr std::size_t kChunk = 1u << 24;
    std::size_t offset = 0;
    do {
        const std::size_t n = std::min(kChunk, document.size() - offset);
        const bool last = offset + n == document.size();
        if (XML_Parse(parser.get(), document.data() + offset, static_cast<int>(n), last) ==
            XML_STATUS_ERROR) {
            fail(Errc::MalformedXml,
                 fmt::format("line {}: {}", XML_GetCurrentLineNumber(parser.get()),
                             XML_ErrorString(XML_GetErrorCode(parser.get()))));
        }
        offset += n;
    } while (offset < document.size());

    if (!st.have_root) fail(Errc::MalformedXml, "line 1: document has no root element");
    return std::move(st.root);
}

}  // namespace peye::xml
