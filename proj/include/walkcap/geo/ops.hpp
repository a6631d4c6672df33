#pragma once

#include "walkcap/geo/frame.hpp"
#include "walkcap/geo/types.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace walkcap::geo {

/// Raised when the boolean kernel rejects its input (e.g. self-crossing rings).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kBufferSegments = 64;

/// Polygons and holes smaller than `min_area_m2` are dropped from boolean
/// results. Without a frame the equatorial scale is used; it over-estimates
/// the metric size of a degree cell, so it can only drop fewer slivers.
struct SliverPolicy {
    double min_area_m2 = 1e-4;
    double m2_per_deg2 = 0.0;  // 0 -> equatorial scale

    static SliverPolicy for_frame(const LocalFrame& frame, double min_area_m2 = 1e-4);
    double threshold_deg2() const noexcept;
};

double area_m2(const GeoMultiPolygon& shape, const LocalFrame& frame);
double area_m2(const GeoPolygon& shape, const LocalFrame& frame);

/// Minkowski sum with a disc of `radius_m`, 64 segments per full circle.
/// Throws std::invalid_argument for radius <= 0 or empty input.
GeoMultiPolygon buffer(const BufferInput& geometry, double radius_m, const LocalFrame& frame);

GeoMultiPolygon difference(const GeoMultiPolygon& subject, const GeoMultiPolygon& clip,
                           const SliverPolicy& slivers = {});

GeoMultiPolygon unite(const GeoMultiPolygon& a, const GeoMultiPolygon& b,
                      const SliverPolicy& slivers = {});

GeoMultiPolygon intersection(const GeoMultiPolygon& a, const GeoMultiPolygon& b,
                             const SliverPolicy& slivers = {});

/// Union of every shape. Inputs are merged pairwise in a fixed balanced-tree
/// order, so the output depends only on the input sequence.
GeoMultiPolygon union_all(std::span<const GeoMultiPolygon> shapes, const SliverPolicy& slivers = {});

struct RepairResult {
    GeoMultiPolygon shape;
    std::vector<std::string> diagnostics;
};

/// Builds a valid multipolygon from arbitrary rings using even-odd fill:
/// a point is inside when it is enclosed by an odd number of ring loops.
/// Rings need not be closed or oriented. Never throws on bad geometry.
RepairResult repair(std::span<const std::vector<GeoPoint>> rings, const SliverPolicy& slivers = {});

/// Convenience: feeds every ring of `shape` back through repair().
RepairResult repair(const GeoMultiPolygon& shape, const SliverPolicy& slivers = {});

/// Regular n-gon inscribed in the circle, first vertex due east.
/// Throws for radius <= 0 or segments < 3.
GeoPolygon regular_polygon(const GeoPoint& center, double radius_m, int segments, const LocalFrame& frame);

/// UI circle normalisation. Requires segments >= 8.
GeoPolygon circle_to_polygon(const GeoPoint& center, double radius_m, int segments, const LocalFrame& frame);

/// Outer rings CCW, holes CW, rings closed.
void orient(GeoMultiPolygon& shape);

/// Canonical form: orientation fixed, each ring rotated to start at its
/// smallest vertex, holes and polygons sorted.
GeoMultiPolygon canonical(GeoMultiPolygon shape);

/// Reason string when `shape` violates the ring/polygon invariants.
std::optional<std::string> validate(const GeoMultiPolygon& shape);

/// Point inside the interior or on the boundary.
bool covers(const GeoMultiPolygon& shape, const GeoPoint& p);
/// Point strictly inside the interior.
bool within(const GeoPoint& p, const GeoMultiPolygon& shape);

}  // namespace walkcap::geo
