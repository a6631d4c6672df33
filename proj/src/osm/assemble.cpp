#include "walkcap/osm/assemble.hpp"

#include "walkcap/geo/geojson.hpp"
#include "walkcap/geo/ops.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <unordered_map>

namespace walkcap::osm {

using geo::GeoPoint;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxMessages = 50;

using Coords = std::vector<GeoPoint>;

class Resolver {
public:
    explicit Resolver(std::span<const OsmElement> elements) {
        for (const auto& el : elements) {
            if (el.kind == ElementKind::node && el.location) nodes_.emplace(el.id, geo::snap(*el.location));
            if (el.kind == ElementKind::way) ways_.emplace(el.id, &el);
        }
    }

    std::optional<GeoPoint> node(ElementId id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) return std::nullopt;
        return it->second;
    }

    const OsmElement* way(ElementId id) const {
        auto it = ways_.find(id);
        return it == ways_.end() ? nullptr : it->second;
    }

    /// Referenced nodes first, falling back to complete inline geometry.
    std::optional<Coords> way_coords(const OsmElement& w) const {
        if (!w.node_refs.empty()) {
            Coords out;
            out.reserve(w.node_refs.size());
            for (ElementId ref : w.node_refs) {
                auto p = node(ref);
                if (!p) return complete(w.geometry, w.node_refs.size());
                out.push_back(*p);
            }
            return out;
        }
        return complete(w.geometry, w.geometry.size());
    }

    static std::optional<Coords> complete(const InlineGeometry& g, std::size_t expected) {
        if (g.empty() || g.size() != expected) return std::nullopt;
        Coords out;
        out.reserve(g.size());
        for (const auto& p : g) {
            if (!p) return std::nullopt;
            out.push_back(geo::snap(*p));
        }
        return out;
    }

private:
    std::unordered_map<ElementId, GeoPoint> nodes_;
    std::unordered_map<ElementId, const OsmElement*> ways_;
};

Coords dedupe(const Coords& in) {
    Coords out;
    out.reserve(in.size());
    for (const auto& p : in)
        if (out.empty() || out.back() != p) out.push_back(p);
    return out;
}

// Joins open member ways end to end into closed rings.
std::optional<std::vector<Coords>> stitch(std::vector<Coords> segments) {
    std::vector<Coords> rings;
    std::vector<bool> used(segments.size(), false);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        Coords ring = segments[i];
        while (ring.front() != ring.back()) {
            bool extended = false;
            for (std::size_t j = 0; j < segments.size() && !extended; ++j) {
                if (used[j]) continue;
                const Coords& s = segments[j];
                if (s.front() == ring.back()) {
                    ring.insert(ring.end(), s.begin() + 1, s.end());
                    extended = true;
                } else if (s.back() == ring.back()) {
                    ring.insert(ring.end(), s.rbegin() + 1, s.rend());
                    extended = true;
                }
                if (extended) used[j] = true;
            }
            if (!extended) return std::nullopt;
        }
        rings.push_back(std::move(ring));
    }
    return rings;
}

std::string feature_id(ElementKind kind, ElementId id) { return std::string(to_string(kind)) + "/" + std::to_string(id); }

int kind_rank(ElementKind k) { return static_cast<int>(k); }

}  // namespace

GeometryKind AssembledFeature::kind() const noexcept {
    switch (geometry.index()) {
        case 0: return GeometryKind::point;
        case 1: return GeometryKind::polyline;
        default: return GeometryKind::polygon;
    }
}

void AssemblyDiagnostics::skip(std::string reason) {
    ++skipped;
    if (messages.size() < kMaxMessages) messages.push_back(std::move(reason));
}

bool has_area_semantics(const TagMap& tags) {
    if (tags.is("area", "yes")) return true;
    if (tags.is("area", "no")) return false;
    for (const char* key : {"building", "building:part", "landuse", "amenity", "leisure", "water", "military", "historic",
                            "shop", "tourism", "place", "area:highway", "man_made"}) {
        if (tags.has(key)) return true;
    }
    if (const auto* v = tags.get("natural"))
        return *v != "coastline" && *v != "cliff" && *v != "ridge" && *v != "arete" && *v != "tree_row";
    if (const auto* v = tags.get("aeroway")) return *v != "runway" && *v != "taxiway";
    if (const auto* v = tags.get("waterway")) return *v == "riverbank" || *v == "dock" || *v == "boatyard";
    if (tags.is("railway", "platform") || tags.is("public_transport", "platform")) return true;
    return false;
}

Assembly assemble(std::span<const OsmElement> elements) {
    Resolver resolver(elements);
    Assembly out;
    auto& diag = out.diagnostics;

    std::vector<const OsmElement*> order;
    order.reserve(elements.size());
    for (const auto& el : elements) order.push_back(&el);
    std::stable_sort(order.begin(), order.end(), [](const OsmElement* a, const OsmElement* b) {
        if (a->kind != b->kind) return kind_rank(a->kind) < kind_rank(b->kind);
        return a->id < b->id;
    });

    for (const OsmElement* el : order) {
        const std::string name = feature_id(el->kind, el->id);
        switch (el->kind) {
            case ElementKind::node: {
                if (el->tags.empty()) break;
                if (!el->location) {
                    diag.skip(name + ": no coordinates");
                    break;
                }
                out.features.push_back({el->id, el->kind, geo::snap(*el->location), el->tags});
                break;
            }
            case ElementKind::way: {
                if (el->tags.empty()) break;
                const std::size_t n = el->node_refs.empty() ? el->geometry.size() : el->node_refs.size();
                if (n < kMinWayNodes || n > kMaxWayNodes) {
                    diag.skip(name + ": " + std::to_string(n) + " nodes outside [2, 2000]");
                    break;
                }
                auto coords = resolver.way_coords(*el);
                if (!coords) {
                    diag.skip(name + ": references a missing node");
                    break;
                }
                const bool closed = coords->size() >= 4 && coords->front() == coords->back();
                if (closed && has_area_semantics(el->tags)) {
                    std::vector<Coords> rings{*coords};
                    auto repaired = geo::repair(std::span<const Coords>(rings));
                    if (repaired.shape.empty()) {
                        diag.skip(name + ": degenerate polygon");
                        break;
                    }
                    out.features.push_back({el->id, el->kind, std::move(repaired.shape), el->tags});
                } else {
                    Coords line = dedupe(*coords);
                    if (line.size() < 2) {
                        diag.skip(name + ": zero-length line");
                        break;
                    }
                    out.features.push_back({el->id, el->kind, geo::LineString{std::move(line)}, el->tags});
                }
                break;
            }
            case ElementKind::relation: {
                if (!el->tags.is("type", "multipolygon")) {
                    ++diag.unsupported_relations;
                    break;
                }
                std::vector<Coords> outer_parts;
                std::vector<Coords> inner_parts;
                bool resolved = !el->members.empty();
                for (const auto& m : el->members) {
                    if (m.kind != ElementKind::way) continue;
                    std::optional<Coords> coords;
                    if (const OsmElement* w = resolver.way(m.ref)) coords = resolver.way_coords(*w);
                    if (!coords) coords = Resolver::complete(m.geometry, m.geometry.size());
                    if (!coords || coords->size() < 2) {
                        resolved = false;
                        break;
                    }
                    (m.role == "inner" ? inner_parts : outer_parts).push_back(dedupe(*coords));
                }
                if (!resolved || outer_parts.empty()) {
                    diag.skip(name + ": missing or empty member ways");
                    break;
                }
                auto outers = stitch(std::move(outer_parts));
                auto inners = stitch(std::move(inner_parts));
                if (!outers || !inners) {
                    diag.skip(name + ": member ways do not close into rings");
                    break;
                }
                std::vector<Coords> rings = std::move(*outers);
                rings.insert(rings.end(), inners->begin(), inners->end());
                auto repaired = geo::repair(std::span<const Coords>(rings));
                if (repaired.shape.empty()) {
                    diag.skip(name + ": degenerate multipolygon");
                    break;
                }
                out.features.push_back({el->id, el->kind, std::move(repaired.shape), el->tags});
                break;
            }
        }
    }
    return out;
}

json features_to_geojson(std::span<const AssembledFeature> features) {
    json list = json::array();
    for (const auto& f : features) {
        json tags = json::object();
        for (const auto& [k, v] : f.tags) tags[k] = v;
        json geometry = std::visit([](const auto& g) { return geo::to_geojson(g); }, f.geometry);
        list.push_back({{"type", "Feature"},
                        {"id", feature_id(f.source, f.element_id)},
                        {"geometry", std::move(geometry)},
                        {"properties", {{"tags", std::move(tags)}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", std::move(list)}};
}

std::vector<AssembledFeature> features_from_geojson(const json& collection) {
    if (!collection.is_object() || collection.value("type", "") != "FeatureCollection" ||
        !collection.contains("features") || !collection["features"].is_array())
        throw geo::GeoJsonError("FeatureCollection expected");
    std::vector<AssembledFeature> out;
    for (const auto& f : collection["features"]) {
        AssembledFeature feature;
        const std::string id = f.value("id", "");
        const auto slash = id.find('/');
        if (slash == std::string::npos) throw geo::GeoJsonError("feature id must look like <kind>/<number>");
        auto kind = element_kind_from(std::string_view(id).substr(0, slash));
        const char* first = id.data() + slash + 1;
        const char* last = id.data() + id.size();
        auto [ptr, ec] = std::from_chars(first, last, feature.element_id);
        if (!kind || ec != std::errc{} || ptr != last) throw geo::GeoJsonError("bad feature id " + id);
        feature.source = *kind;

        const json& geometry = f.at("geometry");
        const std::string type = geometry.value("type", "");
        if (type == "Point") feature.geometry = geo::point_from_geojson(geometry);
        else if (type == "LineString") feature.geometry = geo::linestring_from_geojson(geometry);
        else feature.geometry = geo::multipolygon_from_geojson(geometry);

        if (auto props = f.find("properties"); props != f.end() && props->is_object()) {
            if (auto tags = props->find("tags"); tags != props->end() && tags->is_object()) {
                for (const auto& [k, v] : tags->items())
                    if (v.is_string()) feature.tags.set(k, v.get<std::string>());
            }
        }
        out.push_back(std::move(feature));
    }
    return out;
}

}  // namespace walkcap::osm
