#pragma once

#include "walkcap/geo/types.hpp"
#include "walkcap/osm/classify.hpp"
#include "walkcap/osm/element.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace walkcap::osm {

using FeatureGeometry = std::variant<geo::GeoPoint, geo::LineString, geo::GeoMultiPolygon>;

struct AssembledFeature {
    ElementId element_id = 0;
    ElementKind source = ElementKind::node;
    FeatureGeometry geometry;
    TagMap tags;

    GeometryKind kind() const noexcept;

    friend bool operator==(const AssembledFeature&, const AssembledFeature&) = default;
};

struct AssemblyDiagnostics {
    std::size_t skipped = 0;                // geometry could not be resolved
    std::size_t unsupported_relations = 0;  // routes, boundaries, ...
    std::vector<std::string> messages;      // first few reasons, for logs

    void skip(std::string reason);
};

struct Assembly {
    std::vector<AssembledFeature> features;
    AssemblyDiagnostics diagnostics;
};

/// Resolves element geometry. Tagged nodes become points; ways become
/// polylines, or polygons when closed with area semantics; multipolygon
/// relations become (holed) multipolygons. Untagged elements produce no
/// feature. Dangling references skip the element and count a diagnostic.
/// Output order: ascending (kind, id).
Assembly assemble(std::span<const OsmElement> elements);

/// Closed-way area semantics (area=yes/no, building, landuse, ...).
bool has_area_semantics(const TagMap& tags);

/// FeatureCollection with "id": "<kind>/<id>" and the tags under properties.tags.
nlohmann::json features_to_geojson(std::span<const AssembledFeature> features);
std::vector<AssembledFeature> features_from_geojson(const nlohmann::json& collection);

}  // namespace walkcap::osm
