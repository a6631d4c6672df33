#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace walkcap::geo {

/// WGS84 position in degrees. Matches GeoJSON axis order: lon first.
struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
    friend auto operator<=>(const GeoPoint&, const GeoPoint&) = default;
};

/// Planar position in meters inside a LocalFrame.
struct LocalPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
};

/// Closed ring: first point equals last point.
struct Ring {
    std::vector<GeoPoint> points;

    friend bool operator==(const Ring&, const Ring&) = default;
};

/// Outer ring counterclockwise, holes clockwise.
struct GeoPolygon {
    Ring outer;
    std::vector<Ring> inners;

    friend bool operator==(const GeoPolygon&, const GeoPolygon&) = default;
};

struct GeoMultiPolygon {
    std::vector<GeoPolygon> polygons;

    bool empty() const noexcept { return polygons.empty(); }
    std::size_t size() const noexcept { return polygons.size(); }

    friend bool operator==(const GeoMultiPolygon&, const GeoMultiPolygon&) = default;
};

struct LineString {
    std::vector<GeoPoint> points;

    friend bool operator==(const LineString&, const LineString&) = default;
};

/// Anything that can be buffered into an area.
using BufferInput = std::variant<GeoPoint, LineString, GeoPolygon>;

struct Envelope {
    GeoPoint min{+180.0, +90.0};
    GeoPoint max{-180.0, -90.0};

    bool valid() const noexcept { return min.lon <= max.lon && min.lat <= max.lat; }
    bool intersects(const Envelope& o) const noexcept {
        return valid() && o.valid() && min.lon <= o.max.lon && o.min.lon <= max.lon &&
               min.lat <= o.max.lat && o.min.lat <= max.lat;
    }
    void expand(const GeoPoint& p) noexcept;
    void expand(const Envelope& e) noexcept;
};

Envelope envelope(const GeoMultiPolygon& shape);
Envelope envelope(const GeoPolygon& shape);
Envelope envelope(const LineString& line);

inline GeoMultiPolygon as_multi(GeoPolygon p) {
    GeoMultiPolygon m;
    m.polygons.push_back(std::move(p));
    return m;
}

/// Round to the 1e-9 degree grid used before boolean operations.
GeoPoint snap(GeoPoint p) noexcept;
void snap_in_place(GeoMultiPolygon& shape) noexcept;

std::size_t num_points(const GeoMultiPolygon& shape) noexcept;

}  // namespace walkcap::geo
