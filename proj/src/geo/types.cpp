#include "walkcap/geo/types.hpp"

#include "walkcap/geo/frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace walkcap::geo {

namespace {
constexpr double kSnapScale = 1e9;
}

void Envelope::expand(const GeoPoint& p) noexcept {
    min.lon = std::min(min.lon, p.lon);
    min.lat = std::min(min.lat, p.lat);
    max.lon = std::max(max.lon, p.lon);
    max.lat = std::max(max.lat, p.lat);
}

void Envelope::expand(const Envelope& e) noexcept {
    if (!e.valid()) return;
    expand(e.min);
    expand(e.max);
}

Envelope envelope(const GeoPolygon& shape) {
    Envelope env;
    for (const auto& p : shape.outer.points) env.expand(p);
    return env;
}

Envelope envelope(const GeoMultiPolygon& shape) {
    Envelope env;
    for (const auto& poly : shape.polygons) env.expand(envelope(poly));
    return env;
}

Envelope envelope(const LineString& line) {
    Envelope env;
    for (const auto& p : line.points) env.expand(p);
    return env;
}

GeoPoint snap(GeoPoint p) noexcept {
    return {std::round(p.lon * kSnapScale) / kSnapScale, std::round(p.lat * kSnapScale) / kSnapScale};
}

void snap_in_place(GeoMultiPolygon& shape) noexcept {
    auto snap_ring = [](Ring& r) {
        for (auto& p : r.points) p = snap(p);
    };
    for (auto& poly : shape.polygons) {
        snap_ring(poly.outer);
        for (auto& inner : poly.inners) snap_ring(inner);
    }
}

std::size_t num_points(const GeoMultiPolygon& shape) noexcept {
    std::size_t n = 0;
    for (const auto& poly : shape.polygons) {
        n += poly.outer.points.size();
        for (const auto& inner : poly.inners) n += inner.points.size();
    }
    return n;
}

double meters_per_degree() noexcept { return 2.0 * std::numbers::pi * kEarthRadiusM / 360.0; }

LocalFrame make_local_frame_at(const GeoPoint& origin) {
    if (!std::isfinite(origin.lon) || !std::isfinite(origin.lat) || std::abs(origin.lat) >= 90.0)
        throw std::invalid_argument("local frame origin must be finite with |lat| < 90");
    const double per_deg = meters_per_degree();
    return {origin, per_deg * std::cos(origin.lat * std::numbers::pi / 180.0), per_deg};
}

LocalFrame make_local_frame(const GeoMultiPolygon& boundary) {
    const Envelope env = envelope(boundary);
    if (boundary.empty() || !env.valid())
        throw std::invalid_argument("cannot build a local frame for an empty boundary");
    return make_local_frame_at({(env.min.lon + env.max.lon) / 2.0, (env.min.lat + env.max.lat) / 2.0});
}

}  // namespace walkcap::geo
