#pragma once

#include "walkcap/geo/types.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace walkcap::geo {

class GeoJsonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_geojson(const GeoPoint& p);
nlohmann::json to_geojson(const LineString& line);
nlohmann::json to_geojson(const GeoPolygon& poly);
nlohmann::json to_geojson(const GeoMultiPolygon& shape);

GeoPoint point_from_geojson(const nlohmann::json& geometry);
LineString linestring_from_geojson(const nlohmann::json& geometry);

/// Polygon or MultiPolygon geometry, taken as-is (no orientation fix, no snapping).
GeoMultiPolygon multipolygon_from_geojson(const nlohmann::json& geometry);

/// Reads a selection boundary from a Polygon, MultiPolygon, Feature or
/// FeatureCollection. Polygonal members of a collection are merged; other
/// geometry types are ignored. Coordinates are snapped and orientation
/// normalised. Throws GeoJsonError on structural or validity problems.
GeoMultiPolygon boundary_from_geojson(const nlohmann::json& doc);
GeoMultiPolygon boundary_from_geojson(const std::string& text);

}  // namespace walkcap::geo
