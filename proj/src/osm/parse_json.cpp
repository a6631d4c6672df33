#include "walkcap/osm/parse.hpp"

#include <json.hpp>

#include <cctype>

namespace walkcap::osm {

using nlohmann::json;

namespace {

std::optional<geo::GeoPoint> read_latlon(const json& j) {
    if (!j.is_object()) return std::nullopt;
    auto lat = j.find("lat");
    auto lon = j.find("lon");
    if (lat == j.end() || lon == j.end() || !lat->is_number() || !lon->is_number()) return std::nullopt;
    return geo::GeoPoint{lon->get<double>(), lat->get<double>()};
}

InlineGeometry read_geometry(const json& entry) {
    InlineGeometry out;
    auto it = entry.find("geometry");
    if (it == entry.end() || !it->is_array()) return out;
    out.reserve(it->size());
    for (const auto& g : *it) out.push_back(read_latlon(g));
    return out;
}

ElementId read_id(const json& entry, const char* key, std::size_t index) {
    auto it = entry.find(key);
    if (it == entry.end() || !it->is_number_integer())
        throw OsmParseError("element #" + std::to_string(index) + " has no integer \"" + key + "\"");
    return it->get<ElementId>();
}

}  // namespace

std::vector<OsmElement> parse_overpass_json(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw OsmParseError(std::string("malformed Overpass JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) throw OsmParseError("Overpass JSON must be an object");
    if (auto remark = doc.find("remark"); remark != doc.end() && remark->is_string()) {
        const auto text = remark->get<std::string>();
        if (text.find("error") != std::string::npos) throw OsmParseError("Overpass reported: " + text);
    }
    auto elements = doc.find("elements");
    if (elements == doc.end() || !elements->is_array()) throw OsmParseError("missing \"elements\" array");

    std::vector<OsmElement> out;
    out.reserve(elements->size());
    std::size_t index = 0;
    for (const auto& entry : *elements) {
        const std::size_t i = index++;
        if (!entry.is_object()) throw OsmParseError("element #" + std::to_string(i) + " is not an object");
        auto type = entry.find("type");
        if (type == entry.end() || !type->is_string())
            throw OsmParseError("element #" + std::to_string(i) + " has no \"type\"");
        const auto kind = element_kind_from(type->get<std::string>());
        if (!kind) continue;  // "area", "count", ...

        OsmElement el;
        el.kind = *kind;
        el.id = read_id(entry, "id", i);
        if (auto tags = entry.find("tags"); tags != entry.end() && tags->is_object()) {
            for (const auto& [k, v] : tags->items())
                el.tags.set(k, v.is_string() ? v.get<std::string>() : v.dump());
        }
        switch (el.kind) {
            case ElementKind::node:
                el.location = read_latlon(entry);
                break;
            case ElementKind::way:
                if (auto nodes = entry.find("nodes"); nodes != entry.end() && nodes->is_array()) {
                    el.node_refs.reserve(nodes->size());
                    for (const auto& ref : *nodes) {
                        if (!ref.is_number_integer())
                            throw OsmParseError("way " + std::to_string(el.id) + " has a non-integer node ref");
                        el.node_refs.push_back(ref.get<ElementId>());
                    }
                }
                el.geometry = read_geometry(entry);
                break;
            case ElementKind::relation:
                if (auto members = entry.find("members"); members != entry.end() && members->is_array()) {
                    for (const auto& m : *members) {
                        Member member;
                        auto mtype = m.find("type");
                        const auto mkind = mtype != m.end() && mtype->is_string()
                                               ? element_kind_from(mtype->get<std::string>())
                                               : std::nullopt;
                        if (!mkind)
                            throw OsmParseError("relation " + std::to_string(el.id) + " has a member without type");
                        member.kind = *mkind;
                        member.ref = read_id(m, "ref", i);
                        if (auto role = m.find("role"); role != m.end() && role->is_string())
                            member.role = role->get<std::string>();
                        member.geometry = read_geometry(m);
                        if (member.kind == ElementKind::node) {
                            if (auto at = read_latlon(m)) member.geometry.push_back(at);
                        }
                        el.members.push_back(std::move(member));
                    }
                }
                break;
        }
        out.push_back(std::move(el));
    }
    return out;
}

std::vector<OsmElement> parse_osm(std::string_view bytes) {
    if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
    for (char c : bytes) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '<') return parse_osm_xml(bytes);
        break;
    }
    return parse_overpass_json(bytes);
}

}  // namespace walkcap::osm
