#include "walkcap/geo/geojson.hpp"

#include "walkcap/geo/ops.hpp"

#include <cmath>

namespace walkcap::geo {

using nlohmann::json;

namespace {

json position(const GeoPoint& p) { return json::array({p.lon, p.lat}); }

json ring_json(const Ring& r) {
    json out = json::array();
    for (const auto& p : r.points) out.push_back(position(p));
    return out;
}

json polygon_coords(const GeoPolygon& poly) {
    json rings = json::array();
    rings.push_back(ring_json(poly.outer));
    for (const auto& inner : poly.inners) rings.push_back(ring_json(inner));
    return rings;
}

GeoPoint read_position(const json& j) {
    if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number())
        throw GeoJsonError("position must be an array of at least two numbers");
    GeoPoint p{j[0].get<double>(), j[1].get<double>()};
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) throw GeoJsonError("non-finite coordinate");
    return p;
}

Ring read_ring(const json& j) {
    if (!j.is_array()) throw GeoJsonError("linear ring must be an array of positions");
    Ring r;
    r.points.reserve(j.size());
    for (const auto& pos : j) r.points.push_back(read_position(pos));
    if (r.points.size() < 4) throw GeoJsonError("linear ring needs at least 4 positions");
    if (r.points.front() != r.points.back()) throw GeoJsonError("linear ring is not closed");
    return r;
}

GeoPolygon read_polygon(const json& coords) {
    if (!coords.is_array() || coords.empty()) throw GeoJsonError("polygon needs at least one ring");
    GeoPolygon poly;
    poly.outer = read_ring(coords[0]);
    for (std::size_t i = 1; i < coords.size(); ++i) poly.inners.push_back(read_ring(coords[i]));
    return poly;
}

const json& member(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw GeoJsonError(std::string("missing \"") + key + "\" member");
    return *it;
}

std::string type_of(const json& obj) {
    if (!obj.is_object()) throw GeoJsonError("GeoJSON object expected");
    const json& t = member(obj, "type");
    if (!t.is_string()) throw GeoJsonError("\"type\" must be a string");
    return t.get<std::string>();
}

void collect_polygons(const json& obj, std::vector<GeoMultiPolygon>& out) {
    const std::string type = type_of(obj);
    if (type == "FeatureCollection") {
        const json& features = member(obj, "features");
        if (!features.is_array()) throw GeoJsonError("\"features\" must be an array");
        for (const auto& f : features) collect_polygons(f, out);
    } else if (type == "Feature") {
        const json& geometry = member(obj, "geometry");
        if (!geometry.is_null()) collect_polygons(geometry, out);
    } else if (type == "GeometryCollection") {
        for (const auto& g : member(obj, "geometries")) collect_polygons(g, out);
    } else if (type == "Polygon" || type == "MultiPolygon") {
        out.push_back(multipolygon_from_geojson(obj));
    } else if (type != "Point" && type != "MultiPoint" && type != "LineString" && type != "MultiLineString") {
        throw GeoJsonError("unknown GeoJSON type \"" + type + "\"");
    }
}

}  // namespace

json to_geojson(const GeoPoint& p) { return {{"type", "Point"}, {"coordinates", position(p)}}; }

json to_geojson(const LineString& line) {
    json coords = json::array();
    for (const auto& p : line.points) coords.push_back(position(p));
    return {{"type", "LineString"}, {"coordinates", std::move(coords)}};
}

json to_geojson(const GeoPolygon& poly) { return {{"type", "Polygon"}, {"coordinates", polygon_coords(poly)}}; }

json to_geojson(const GeoMultiPolygon& shape) {
    json coords = json::array();
    for (const auto& poly : shape.polygons) coords.push_back(polygon_coords(poly));
    return {{"type", "MultiPolygon"}, {"coordinates", std::move(coords)}};
}

GeoPoint point_from_geojson(const json& geometry) {
    if (type_of(geometry) != "Point") throw GeoJsonError("Point expected");
    return read_position(member(geometry, "coordinates"));
}

LineString linestring_from_geojson(const json& geometry) {
    if (type_of(geometry) != "LineString") throw GeoJsonError("LineString expected");
    LineString line;
    for (const auto& pos : member(geometry, "coordinates")) line.points.push_back(read_position(pos));
    if (line.points.size() < 2) throw GeoJsonError("LineString needs at least 2 positions");
    return line;
}

GeoMultiPolygon multipolygon_from_geojson(const json& geometry) {
    const std::string type = type_of(geometry);
    const json& coords = member(geometry, "coordinates");
    GeoMultiPolygon shape;
    if (type == "Polygon") {
        shape.polygons.push_back(read_polygon(coords));
    } else if (type == "MultiPolygon") {
        if (!coords.is_array()) throw GeoJsonError("MultiPolygon coordinates must be an array");
        for (const auto& poly : coords) shape.polygons.push_back(read_polygon(poly));
    } else {
        throw GeoJsonError("Polygon or MultiPolygon expected, got " + type);
    }
    return shape;
}

GeoMultiPolygon boundary_from_geojson(const json& doc) {
    std::vector<GeoMultiPolygon> parts;
    collect_polygons(doc, parts);
    if (parts.empty()) throw GeoJsonError("no Polygon or MultiPolygon geometry found");
    for (auto& part : parts) {
        snap_in_place(part);
        orient(part);
        if (auto reason = validate(part)) throw GeoJsonError("invalid boundary: " + *reason);
    }
    GeoMultiPolygon merged;
    try {
        merged = parts.size() == 1 ? std::move(parts.front()) : union_all(parts);
    } catch (const GeometryError& e) {
        throw GeoJsonError(std::string("invalid boundary: ") + e.what());
    }
    if (merged.empty()) throw GeoJsonError("boundary has no area");
    return merged;
}

GeoMultiPolygon boundary_from_geojson(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw GeoJsonError(std::string("malformed GeoJSON: ") + e.what());
    }
    return boundary_from_geojson(doc);
}

}  // namespace walkcap::geo
