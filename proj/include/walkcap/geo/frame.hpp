#pragma once

#include "walkcap/geo/types.hpp"

namespace walkcap::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Metres per degree of latitude on the spherical Earth (2 pi R / 360).
double meters_per_degree() noexcept;

/// Equirectangular tangent frame. Linear in both axes, so boolean operations
/// done in degrees and areas measured here agree exactly up to the two
/// scale factors. Accurate to ~0.1% for extents under 10 km.
struct LocalFrame {
    GeoPoint origin;
    double meters_per_degree_lon = 0.0;
    double meters_per_degree_lat = 0.0;

    LocalPoint to_local(const GeoPoint& p) const noexcept {
        return {(p.lon - origin.lon) * meters_per_degree_lon,
                (p.lat - origin.lat) * meters_per_degree_lat};
    }
    GeoPoint to_geo(const LocalPoint& p) const noexcept {
        return {origin.lon + p.x / meters_per_degree_lon,
                origin.lat + p.y / meters_per_degree_lat};
    }
    /// Square metres covered by one square degree.
    double m2_per_deg2() const noexcept { return meters_per_degree_lon * meters_per_degree_lat; }
};

/// Frame centred on the bounding-box centre of `boundary`.
/// Throws std::invalid_argument on an empty boundary.
LocalFrame make_local_frame(const GeoMultiPolygon& boundary);

LocalFrame make_local_frame_at(const GeoPoint& origin);

}  // namespace walkcap::geo
