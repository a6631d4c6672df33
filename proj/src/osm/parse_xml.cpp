#include "walkcap/osm/parse.hpp"

#include <expat.h>

#include <charconv>
#include <cstring>
#include <memory>

namespace walkcap::osm {

namespace {

const char* attribute(const XML_Char** attrs, const char* name) {
    for (int i = 0; attrs[i] != nullptr; i += 2)
        if (std::strcmp(attrs[i], name) == 0) return attrs[i + 1];
    return nullptr;
}

template <typename T>
std::optional<T> parse_number(const char* text) {
    if (text == nullptr) return std::nullopt;
    T value{};
    const char* end = text + std::strlen(text);
    auto [ptr, ec] = std::from_chars(text, end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

std::optional<geo::GeoPoint> read_latlon(const XML_Char** attrs) {
    auto lat = parse_number<double>(attribute(attrs, "lat"));
    auto lon = parse_number<double>(attribute(attrs, "lon"));
    if (!lat || !lon) return std::nullopt;
    return geo::GeoPoint{*lon, *lat};
}

class XmlReader {
public:
    explicit XmlReader(XML_Parser parser) : parser_(parser) {}

    static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
        static_cast<XmlReader*>(self)->start(name, attrs);
    }
    static void XMLCALL on_end(void* self, const XML_Char* name) { static_cast<XmlReader*>(self)->end(name); }

    std::vector<OsmElement> elements;
    std::optional<std::string> error;
    std::size_t error_offset = 0;

private:
    void fail(std::string message) {
        if (error) return;
        error = std::move(message);
        error_offset = static_cast<std::size_t>(XML_GetCurrentByteIndex(parser_));
        XML_StopParser(parser_, XML_FALSE);
    }

    void start(const char* name, const XML_Char** attrs) {
        if (error) return;
        if (auto kind = element_kind_from(name)) {
            auto id = parse_number<ElementId>(attribute(attrs, "id"));
            if (!id) return fail(std::string("<") + name + "> without a valid id attribute");
            current_ = OsmElement{};
            current_->id = *id;
            current_->kind = *kind;
            const char* visible = attribute(attrs, "visible");
            hidden_ = visible != nullptr && std::strcmp(visible, "false") == 0;
            if (*kind == ElementKind::node) current_->location = read_latlon(attrs);
            return;
        }
        if (!current_) return;
        if (std::strcmp(name, "tag") == 0) {
            const char* k = attribute(attrs, "k");
            const char* v = attribute(attrs, "v");
            if (k == nullptr || v == nullptr) return fail("<tag> without k/v attributes");
            current_->tags.set(k, v);
        } else if (std::strcmp(name, "nd") == 0) {
            if (in_member_) {
                current_->members.back().geometry.push_back(read_latlon(attrs));
                return;
            }
            auto ref = parse_number<ElementId>(attribute(attrs, "ref"));
            if (!ref) return fail("<nd> without a valid ref attribute");
            current_->node_refs.push_back(*ref);
            current_->geometry.push_back(read_latlon(attrs));
        } else if (std::strcmp(name, "member") == 0) {
            const char* type = attribute(attrs, "type");
            auto kind = type != nullptr ? element_kind_from(type) : std::nullopt;
            auto ref = parse_number<ElementId>(attribute(attrs, "ref"));
            if (!kind || !ref) return fail("<member> without valid type/ref attributes");
            Member m;
            m.kind = *kind;
            m.ref = *ref;
            if (const char* role = attribute(attrs, "role")) m.role = role;
            if (m.kind == ElementKind::node) {
                if (auto at = read_latlon(attrs)) m.geometry.push_back(at);
            }
            current_->members.push_back(std::move(m));
            in_member_ = true;
        }
    }

    void end(const char* name) {
        if (error || !current_) return;
        if (std::strcmp(name, "member") == 0) {
            in_member_ = false;
            return;
        }
        if (!element_kind_from(name)) return;
        // Plain exports carry no inline coordinates; keep the field empty then,
        // matching the JSON "out body" form.
        bool any = false;
        for (const auto& g : current_->geometry) any = any || g.has_value();
        if (!any) current_->geometry.clear();
        if (!hidden_) elements.push_back(std::move(*current_));
        current_.reset();
    }

    XML_Parser parser_;
    std::optional<OsmElement> current_;
    bool in_member_ = false;
    bool hidden_ = false;
};

}  // namespace

std::vector<OsmElement> parse_osm_xml(std::string_view bytes) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(XML_ParserCreate(nullptr),
                                                                                         &XML_ParserFree);
    if (!parser) throw std::bad_alloc();
    XmlReader reader(parser.get());
    XML_SetUserData(parser.get(), &reader);
    XML_SetElementHandler(parser.get(), &XmlReader::on_start, &XmlReader::on_end);

    const auto status = XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
    if (reader.error) throw OsmParseError("malformed OSM XML: " + *reader.error, reader.error_offset);
    if (status != XML_STATUS_OK) {
        const auto offset = static_cast<std::size_t>(XML_GetCurrentByteIndex(parser.get()));
        throw OsmParseError(std::string("malformed OSM XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                            offset);
    }
    return std::move(reader.elements);
}

}  // namespace walkcap::osm
