#pragma once

// Random city-block scenes and an area oracle that never touches the
// polygon kernel. Each obstacle is kept in metres as the generator drew it
// (rings, or centrelines/points with a radius), and the oracle counts the
// centres of a square sampling grid that fall inside the boundary and
// outside every obstacle, row by row.

#include "scene.hpp"

#include "walkcap/osm/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace walkcap::testing {

using Path = std::vector<geo::LocalPoint>;

struct OracleShape {
    enum class Kind { rings, capsules, disc };
    Kind kind = Kind::rings;
    std::vector<Path> rings;  // even-odd fill; closing edge implied
    Path line;                // capsules: centreline; disc: one point
    double radius = 0.0;
};

struct SyntheticScene {
    LocalFrame frame;
    Path boundary_ring;
    geo::GeoMultiPolygon boundary;
    std::vector<osm::AssembledFeature> features;
    std::vector<OracleShape> obstacles;  // what the default options subtract
};

namespace detail {

inline geo::Ring geo_ring(const LocalFrame& f, const Path& path) {
    geo::Ring r;
    for (const auto& p : path) r.points.push_back(at(f, p.x, p.y));
    r.points.push_back(r.points.front());
    return r;
}

inline Path star_path(std::mt19937_64& rng, double cx, double cy, double rmin, double rmax, int n, bool clockwise) {
    std::uniform_real_distribution<double> jitter(0.1, 0.9), radius(rmin, rmax);
    const double sector = 2.0 * std::numbers::pi / n;
    Path out;
    for (int k = 0; k < n; ++k) {
        const double a = sector * (k + jitter(rng));
        const double r = radius(rng);
        out.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    if (clockwise) std::reverse(out.begin(), out.end());
    return out;
}

inline Path rotated_rect_path(double cx, double cy, double w, double h, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Path out;
    for (auto [u, v] : {std::pair{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}})
        out.push_back({cx + u * c - v * s, cy + u * s + v * c});
    return out;
}

// x where the edge p-q crosses the row, half-open in y so shared vertices count once
inline std::optional<double> crossing(const geo::LocalPoint& p, const geo::LocalPoint& q, double y) {
    if ((p.y > y) == (q.y > y)) return std::nullopt;
    return p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
}

using Interval = std::pair<double, double>;

inline void even_odd_intervals(const std::vector<Path>& rings, double y, std::vector<Interval>& out) {
    std::vector<double> xs;
    for (const auto& ring : rings)
        for (std::size_t i = 0; i < ring.size(); ++i)
            if (auto x = crossing(ring[i], ring[(i + 1) % ring.size()], y)) xs.push_back(*x);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) out.emplace_back(xs[i], xs[i + 1]);
}

inline std::optional<Interval> disc_interval(const geo::LocalPoint& c, double r, double y) {
    const double dy = y - c.y;
    if (std::abs(dy) >= r) return std::nullopt;
    const double half = std::sqrt(r * r - dy * dy);
    return Interval{c.x - half, c.x + half};
}

// Row through a capsule (segment a-b swept by a disc): convex, so the hull of
// the row through both end discs and the side rectangle.
inline std::optional<Interval> capsule_interval(const geo::LocalPoint& a, const geo::LocalPoint& b, double r,
                                                double y) {
    std::optional<Interval> acc;
    auto merge = [&](Interval v) {
        acc = acc ? Interval{std::min(acc->first, v.first), std::max(acc->second, v.second)} : v;
    };
    if (auto v = disc_interval(a, r, y)) merge(*v);
    if (auto v = disc_interval(b, r, y)) merge(*v);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len > 0.0) {
        const double nx = -(b.y - a.y) / len * r, ny = (b.x - a.x) / len * r;
        const Path quad{{a.x + nx, a.y + ny}, {b.x + nx, b.y + ny}, {b.x - nx, b.y - ny}, {a.x - nx, a.y - ny}};
        std::vector<Interval> part;
        even_odd_intervals({quad}, y, part);
        for (const auto& v : part) merge(v);
    }
    return acc;
}

// Grid centres x0 + (k + 1/2) h lying in [a, b).
inline long long samples_in(double a, double b, double x0, double h) {
    if (b <= a) return 0;
    return static_cast<long long>(std::ceil((b - x0) / h - 0.5)) - static_cast<long long>(std::ceil((a - x0) / h - 0.5));
}

}  // namespace detail

/// Walkable area by point sampling on a `cell` metre grid.
inline double raster_walkable_area(const Path& boundary, const std::vector<OracleShape>& obstacles, double cell = 0.1) {
    double xmin = boundary[0].x, xmax = xmin, ymin = boundary[0].y, ymax = ymin;
    for (const auto& p : boundary) {
        xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
    }
    const double x0 = std::floor(xmin / cell) * cell;
    const double y0 = std::floor(ymin / cell) * cell;
    const long long rows = static_cast<long long>(std::ceil((ymax - y0) / cell));

    long long inside = 0;
    std::vector<detail::Interval> open, blocked;
    for (long long row = 0; row < rows; ++row) {
        const double y = y0 + (static_cast<double>(row) + 0.5) * cell;
        open.clear();
        detail::even_odd_intervals({boundary}, y, open);
        if (open.empty()) continue;
        blocked.clear();
        for (const auto& o : obstacles) {
            switch (o.kind) {
                case OracleShape::Kind::rings: detail::even_odd_intervals(o.rings, y, blocked); break;
                case OracleShape::Kind::disc:
                    if (auto v = detail::disc_interval(o.line.front(), o.radius, y)) blocked.push_back(*v);
                    break;
                case OracleShape::Kind::capsules:
                    for (std::size_t i = 0; i + 1 < o.line.size(); ++i)
                        if (auto v = detail::capsule_interval(o.line[i], o.line[i + 1], o.radius, y)) blocked.push_back(*v);
                    break;
            }
        }
        std::sort(blocked.begin(), blocked.end());
        std::vector<detail::Interval> merged;
        for (const auto& v : blocked) {
            if (!merged.empty() && v.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, v.second);
            else
                merged.push_back(v);
        }
        for (const auto& [a, b] : open) {
            inside += detail::samples_in(a, b, x0, cell);
            for (const auto& [c, d] : merged) inside -= detail::samples_in(std::max(a, c), std::min(b, d), x0, cell);
        }
    }
    return static_cast<double>(inside) * cell * cell;
}

/// A rotated square boundary, 1 km on a side by default, with up to `max_obstacles` mixed obstacles
/// (buildings, some with courtyards, water with islands, roads with and
/// without width tags, railways, trees, benches), plus a few features the
/// default options ignore. Some obstacles straddle the boundary edge.
inline SyntheticScene synthetic_scene(std::uint64_t seed, int max_obstacles = 100, double side = 1000.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

    SyntheticScene s;
    s.frame = lisbon_frame();
    s.boundary_ring = detail::rotated_rect_path(0.0, 0.0, side, side, uniform(0.0, std::numbers::pi / 2));
    s.boundary = multi({detail::geo_ring(s.frame, s.boundary_ring), {}});
    geo::orient(s.boundary);

    // some positions fall outside, so obstacles straddle the edge
    const double reach = 0.6 * side;
    auto where = [&] { return geo::LocalPoint{uniform(-reach, reach), uniform(-reach, reach)}; };
    osm::ElementId next_id = 1;
    auto add = [&](osm::ElementKind kind, osm::FeatureGeometry g, osm::TagMap tags) {
        s.features.push_back({next_id++, kind, std::move(g), std::move(tags)});
    };
    auto polygon_geometry = [&](const std::vector<Path>& rings) {
        GeoPolygon poly{detail::geo_ring(s.frame, rings.front()), {}};
        for (std::size_t i = 1; i < rings.size(); ++i) poly.inners.push_back(detail::geo_ring(s.frame, rings[i]));
        auto m = multi(std::move(poly));
        geo::orient(m);
        return m;
    };
    auto line_geometry = [&](const Path& path) {
        geo::LineString l;
        for (const auto& p : path) l.points.push_back(at(s.frame, p.x, p.y));
        return l;
    };
    auto random_path = [&](int vertices, double step) {
        Path path{where()};
        double heading = uniform(0, 2 * std::numbers::pi);
        for (int i = 1; i < vertices; ++i) {
            heading += uniform(-0.8, 0.8);
            path.push_back({path.back().x + step * std::cos(heading), path.back().y + step * std::sin(heading)});
        }
        return path;
    };

    const int count = std::uniform_int_distribution<int>(max_obstacles / 2, max_obstacles)(rng);
    for (int i = 0; i < count; ++i) {
        const double pick = unit(rng);
        if (pick < 0.30) {
            const auto c = where();
            std::vector<Path> rings;
            if (unit(rng) < 0.5) {
                rings.push_back(detail::rotated_rect_path(c.x, c.y, uniform(8, 60), uniform(8, 60), uniform(0, 3)));
            } else {
                rings.push_back(detail::star_path(rng, c.x, c.y, 15, 40, 9, false));
                // courtyard, filled by the default options
                if (unit(rng) < 0.5) rings.push_back(detail::star_path(rng, c.x, c.y, 4, 10, 6, true));
            }
            add(osm::ElementKind::way, polygon_geometry(rings), {{"building", "yes"}});
            s.obstacles.push_back({OracleShape::Kind::rings, {rings.front()}, {}, 0.0});
        } else if (pick < 0.40) {
            const auto c = where();
            std::vector<Path> rings{detail::star_path(rng, c.x, c.y, 25, 60, 12, false)};
            if (unit(rng) < 0.5) rings.push_back(detail::star_path(rng, c.x, c.y, 5, 15, 7, true));
            add(osm::ElementKind::relation, polygon_geometry(rings), {{"type", "multipolygon"}, {"natural", "water"}});
            s.obstacles.push_back({OracleShape::Kind::rings, rings, {}, 0.0});
        } else if (pick < 0.65) {
            const auto path = random_path(std::uniform_int_distribution<int>(2, 5)(rng), uniform(30, 150));
            osm::TagMap tags;
            double radius = 0.0;
            const double road = unit(rng);
            if (road < 0.4) {
                tags = {{"highway", "residential"}};
                radius = 3.0;
            } else if (road < 0.6) {
                tags = {{"highway", "service"}};
                radius = 2.0;
            } else if (road < 0.8) {
                const double width = std::round(uniform(4, 14));
                tags = {{"highway", "primary"}, {"width", std::to_string(static_cast<int>(width))}};
                radius = width / 2;
            } else {
                tags = {{"railway", "rail"}};
                radius = 1.5;
            }
            add(osm::ElementKind::way, line_geometry(path), std::move(tags));
            s.obstacles.push_back({OracleShape::Kind::capsules, {}, path, radius});
        } else if (pick < 0.90) {
            const auto c = where();
            const bool tree = unit(rng) < 0.6;
            add(osm::ElementKind::node, at(s.frame, c.x, c.y),
                tree ? osm::TagMap{{"natural", "tree"}} : osm::TagMap{{"amenity", "bench"}});
            s.obstacles.push_back({OracleShape::Kind::disc, {}, {c}, tree ? 3.0 : 1.0});
        } else {
            // ignored by default: grass, footways, shops
            const auto c = where();
            const double kind = unit(rng);
            if (kind < 0.4)
                add(osm::ElementKind::way, polygon_geometry({detail::star_path(rng, c.x, c.y, 10, 30, 8, false)}),
                    {{"landuse", "grass"}});
            else if (kind < 0.8)
                add(osm::ElementKind::way, line_geometry(random_path(3, 40)), {{"highway", "footway"}});
            else
                add(osm::ElementKind::node, at(s.frame, c.x, c.y), {{"shop", "bakery"}});
        }
    }
    return s;
}

}  // namespace walkcap::testing
