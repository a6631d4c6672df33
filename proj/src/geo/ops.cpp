#include "walkcap/geo/ops.hpp"

#define BOOST_ALLOW_DEPRECATED_HEADERS
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/linestring.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <clipper.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace walkcap::geo {

namespace bg = boost::geometry;

namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPoint, /*ClockWise=*/false, /*Closed=*/true>;
using BRing = BPoly::ring_type;
using BMulti = bg::model::multi_polygon<BPoly>;
using BLine = bg::model::linestring<BPoint>;

BPoint to_b(const GeoPoint& p) { return {p.lon, p.lat}; }
GeoPoint from_b(const BPoint& p) { return {p.x(), p.y()}; }

BRing to_b(const Ring& r) {
    BRing out;
    out.reserve(r.points.size());
    for (const auto& p : r.points) out.push_back(to_b(p));
    return out;
}

Ring from_b(const BRing& r) {
    Ring out;
    out.points.reserve(r.size());
    for (const auto& p : r) out.points.push_back(from_b(p));
    return out;
}

BPoly to_b(const GeoPolygon& poly) {
    BPoly out;
    out.outer() = to_b(poly.outer);
    for (const auto& inner : poly.inners) out.inners().push_back(to_b(inner));
    return out;
}

GeoPolygon from_b(const BPoly& poly) {
    GeoPolygon out;
    out.outer = from_b(poly.outer());
    for (const auto& inner : poly.inners()) out.inners.push_back(from_b(inner));
    return out;
}

BMulti to_b(const GeoMultiPolygon& shape) {
    BMulti out;
    out.reserve(shape.polygons.size());
    for (const auto& poly : shape.polygons) out.push_back(to_b(poly));
    return out;
}

GeoMultiPolygon from_b(const BMulti& shape) {
    GeoMultiPolygon out;
    out.polygons.reserve(shape.size());
    for (const auto& poly : shape) out.polygons.push_back(from_b(poly));
    return out;
}

// Polygon overlay runs on Clipper's integer kernel. One unit is 1e-9 degree,
// the snapping grid, so snapped input converts exactly.
namespace cl = ClipperLib;

constexpr double kGridPerDegree = 1e9;

cl::IntPoint to_c(const GeoPoint& p) {
    return {static_cast<cl::cInt>(std::llround(p.lon * kGridPerDegree)),
            static_cast<cl::cInt>(std::llround(p.lat * kGridPerDegree))};
}

GeoPoint from_c(const cl::IntPoint& p) {
    return {static_cast<double>(p.X) / kGridPerDegree, static_cast<double>(p.Y) / kGridPerDegree};
}

cl::Path to_c(const std::vector<GeoPoint>& ring, bool positive) {
    cl::Path out;
    out.reserve(ring.size());
    for (const auto& p : ring) {
        auto q = to_c(p);
        if (out.empty() || out.back() != q) out.push_back(q);
    }
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    if (out.size() >= 3 && (cl::Area(out) > 0) != positive) cl::ReversePath(out);
    return out;
}

// Outers counterclockwise, holes clockwise: non-zero fill then reads the
// multipolygon as intended.
cl::Paths to_c(const GeoMultiPolygon& shape) {
    cl::Paths out;
    for (const auto& poly : shape.polygons) {
        out.push_back(to_c(poly.outer.points, true));
        for (const auto& inner : poly.inners) out.push_back(to_c(inner.points, false));
    }
    std::erase_if(out, [](const cl::Path& p) { return p.size() < 3; });
    return out;
}

Ring from_c(const cl::Path& path, bool positive) {
    Ring r;
    r.points.reserve(path.size() + 1);
    for (const auto& q : path) r.points.push_back(from_c(q));
    if ((cl::Area(path) > 0) != positive) std::reverse(r.points.begin(), r.points.end());
    r.points.push_back(r.points.front());
    return r;
}

// Splits a ring that passes a vertex twice into loops that do not; an
// inverted hole comes out as a loop of opposite orientation.
void split_at_repeats(const cl::Path& ring, cl::Paths& out) {
    std::map<std::pair<cl::cInt, cl::cInt>, std::size_t> position;
    cl::Path stack;
    for (const auto& v : ring) {
        const auto [it, fresh] = position.try_emplace({v.X, v.Y}, stack.size());
        if (fresh) {
            stack.push_back(v);
            continue;
        }
        const std::size_t k = it->second;
        cl::Path loop(stack.begin() + static_cast<std::ptrdiff_t>(k), stack.end());
        for (std::size_t i = k + 1; i < stack.size(); ++i) position.erase({stack[i].X, stack[i].Y});
        stack.resize(k + 1);
        if (loop.size() >= 3) out.push_back(std::move(loop));
    }
    if (stack.size() >= 3) out.push_back(std::move(stack));
}

// Makes every vertex that lies on the interior of another edge an explicit
// vertex of that edge, so touching rings share vertices exactly.
cl::Paths node_t_junctions(const cl::Paths& paths) {
    std::vector<cl::IntPoint> vertices;
    for (const auto& path : paths) vertices.insert(vertices.end(), path.begin(), path.end());
    auto by_xy = [](const cl::IntPoint& a, const cl::IntPoint& b) { return a.X != b.X ? a.X < b.X : a.Y < b.Y; };
    std::sort(vertices.begin(), vertices.end(), by_xy);
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());

    cl::Paths out;
    out.reserve(paths.size());
    std::vector<std::pair<__int128, cl::IntPoint>> hits;
    for (const auto& path : paths) {
        cl::Path noded;
        noded.reserve(path.size());
        for (std::size_t i = 0; i < path.size(); ++i) {
            const cl::IntPoint a = path[i];
            const cl::IntPoint b = path[(i + 1) % path.size()];
            noded.push_back(a);
            const cl::cInt x0 = std::min(a.X, b.X), x1 = std::max(a.X, b.X);
            const cl::cInt y0 = std::min(a.Y, b.Y), y1 = std::max(a.Y, b.Y);
            const __int128 dx = b.X - a.X, dy = b.Y - a.Y;
            hits.clear();
            auto it = std::lower_bound(vertices.begin(), vertices.end(), cl::IntPoint{x0, y0}, by_xy);
            for (; it != vertices.end() && it->X <= x1; ++it) {
                const cl::IntPoint& v = *it;
                if (v.Y < y0 || v.Y > y1 || v == a || v == b) continue;
                const __int128 vx = v.X - a.X, vy = v.Y - a.Y;
                if (dx * vy - dy * vx != 0) continue;
                hits.emplace_back(dx * vx + dy * vy, v);
            }
            std::sort(hits.begin(), hits.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
            for (const auto& h : hits) noded.push_back(h.second);
        }
        out.push_back(std::move(noded));
    }
    return out;
}

// Rings from strictly simple output may still meet at vertices, e.g. a hole
// touching its shell twice. Re-tracing every ring edge, turning to the first
// edge clockwise from the way back at each shared vertex, yields faces that
// only touch at isolated points.
cl::Paths untangle(const cl::Paths& paths) {
    using Key = std::pair<cl::cInt, cl::cInt>;
    auto key = [](const cl::IntPoint& p) { return Key{p.X, p.Y}; };
    struct Edge {
        cl::IntPoint from, to;
    };
    std::vector<Edge> edges;
    std::map<std::pair<Key, Key>, std::vector<std::size_t>> open;
    std::vector<bool> used;
    bool shared = false;
    for (const auto& path : paths) {
        for (std::size_t i = 0; i < path.size(); ++i) {
            const Edge e{path[i], path[(i + 1) % path.size()]};
            // An edge walked both ways is a zero-width seam; both copies go.
            auto reverse = open.find({key(e.to), key(e.from)});
            if (reverse != open.end() && !reverse->second.empty()) {
                used[reverse->second.back()] = true;
                reverse->second.pop_back();
                shared = true;
                continue;
            }
            open[{key(e.from), key(e.to)}].push_back(edges.size());
            edges.push_back(e);
            used.push_back(false);
        }
    }
    std::map<Key, std::vector<std::size_t>> outgoing;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (used[i]) continue;
        auto& out = outgoing[key(edges[i].from)];
        shared = shared || !out.empty();
        out.push_back(i);
    }
    if (!shared) return paths;

    auto heading = [](const cl::IntPoint& a, const cl::IntPoint& b) {
        return std::atan2(static_cast<double>(b.Y - a.Y), static_cast<double>(b.X - a.X));
    };
    cl::Paths faces;
    for (std::size_t start = 0; start < edges.size(); ++start) {
        if (used[start]) continue;
        cl::Path face;
        std::size_t e = start;
        for (std::size_t guard = 0; guard <= edges.size(); ++guard) {
            used[e] = true;
            face.push_back(edges[e].from);
            const auto& candidates = outgoing[key(edges[e].to)];
            std::size_t next = candidates.front();
            if (candidates.size() > 1) {
                const double back = heading(edges[e].to, edges[e].from);
                double best = 10.0;
                for (std::size_t c : candidates) {
                    double turn = std::fmod(back - heading(edges[c].from, edges[c].to) + 4.0 * std::numbers::pi,
                                            2.0 * std::numbers::pi);
                    if (turn == 0.0) turn = 2.0 * std::numbers::pi;
                    if (turn < best) best = turn, next = c;
                }
            }
            if (next == start) break;
            if (used[next]) return paths;  // inconsistent edge set; keep the input
            e = next;
        }
        split_at_repeats(face, faces);
    }
    return faces;
}

Envelope path_envelope(const cl::Path& path) {
    Envelope env;
    for (const auto& q : path) env.expand(from_c(q));
    return env;
}

// Pairs holes with shells from flat output. The PolyTree nesting is not
// trusted: with strictly simple output it can report a hole at top level.
GeoMultiPolygon assemble(const cl::Paths& paths, double threshold_grid2) {
    struct Shell {
        const cl::Path* path;
        double area;
        GeoPolygon poly;
        Envelope env;
    };
    std::vector<Shell> shells;
    std::vector<const cl::Path*> holes;
    const cl::Paths faces = untangle(node_t_junctions(paths));
    for (const auto& p : faces) {
        const double a = cl::Area(p);
        if (std::abs(a) < threshold_grid2) continue;
        if (a > 0) {
            shells.push_back({&p, a, {from_c(p, true), {}}, path_envelope(p)});
        }
        else holes.push_back(&p);
    }
    std::stable_sort(shells.begin(), shells.end(), [](const Shell& x, const Shell& y) { return x.area < y.area; });
    // Votes from hole vertices and edge midpoints; rounding can leave a few
    // of them just outside the true parent.
    for (const cl::Path* hole : holes) {
        Shell* parent = nullptr;
        long best = 0;
        const Envelope hole_env = path_envelope(*hole);
        for (auto& shell : shells) {
            if (!shell.env.intersects(hole_env)) continue;
            long score = 0;
            for (std::size_t i = 0; i < hole->size(); ++i) {
                const cl::IntPoint& p = (*hole)[i];
                const cl::IntPoint& q = (*hole)[(i + 1) % hole->size()];
                for (const cl::IntPoint& t : {p, cl::IntPoint{p.X + (q.X - p.X) / 2, p.Y + (q.Y - p.Y) / 2}}) {
                    const int side = cl::PointInPolygon(t, *shell.path);
                    score += side == 1 ? 1 : (side == 0 ? -1 : 0);
                }
            }
            if (score > best) best = score, parent = &shell;
        }
        if (parent) parent->poly.inners.push_back(from_c(*hole, false));
    }
    GeoMultiPolygon out;
    out.polygons.reserve(shells.size());
    for (auto& shell : shells) out.polygons.push_back(std::move(shell.poly));
    return out;
}

cl::Paths execute(cl::ClipType op, const cl::Paths& subject, const cl::Paths& clip, cl::PolyFillType fill,
                  const char* name) {
    cl::Clipper c;
    c.StrictlySimple(true);
    cl::Paths result;
    try {
        c.AddPaths(subject, cl::ptSubject, true);
        if (!clip.empty()) c.AddPaths(clip, cl::ptClip, true);
        if (!c.Execute(op, result, fill, fill)) throw GeometryError(std::string(name) + " failed");
    } catch (const cl::clipperException& e) {
        throw GeometryError(std::string(name) + " failed: " + e.what());
    }
    return result;
}

constexpr int kCleanupPasses = 4;

// Intersection vertices are rounded to the grid, which can leave edges
// crossing by less than a grid unit. Re-running a union over the result
// nodes those crossings; a few passes settle every case seen in testing.
GeoMultiPolygon run(cl::ClipType op, const cl::Paths& subject, const cl::Paths& clip, cl::PolyFillType fill,
                    const SliverPolicy& slivers, const char* name) {
    const double threshold = slivers.threshold_deg2() * kGridPerDegree * kGridPerDegree;
    GeoMultiPolygon out = assemble(execute(op, subject, clip, fill, name), threshold);
    for (int pass = 0; pass < kCleanupPasses && !bg::is_valid(to_b(out)); ++pass)
        out = assemble(execute(cl::ctUnion, to_c(out), {}, cl::pftNonZero, name), threshold);
    return out;
}

double shoelace(const std::vector<GeoPoint>& pts, const LocalFrame& frame) {
    if (pts.size() < 3) return 0.0;
    // Relative to the first vertex to limit cancellation.
    const LocalPoint o = frame.to_local(pts.front());
    double twice = 0.0;
    LocalPoint prev{0.0, 0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const LocalPoint q = frame.to_local(pts[i]);
        const LocalPoint cur{q.x - o.x, q.y - o.y};
        twice += prev.x * cur.y - cur.x * prev.y;
        prev = cur;
    }
    return twice / 2.0;
}

double shoelace_deg2(const std::vector<GeoPoint>& pts) {
    if (pts.size() < 3) return 0.0;
    double twice = 0.0;
    const GeoPoint o = pts.front();
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double ax = pts[i].lon - o.lon, ay = pts[i].lat - o.lat;
        const double bx = pts[i + 1].lon - o.lon, by = pts[i + 1].lat - o.lat;
        twice += ax * by - bx * ay;
    }
    return twice / 2.0;
}

BMulti local_to_geo(const BMulti& local, const LocalFrame& frame) {
    BMulti out = local;
    auto convert = [&](BRing& ring) {
        for (auto& p : ring) {
            const GeoPoint g = snap(frame.to_geo({p.x(), p.y()}));
            p = to_b(g);
        }
    };
    for (auto& poly : out) {
        convert(poly.outer());
        for (auto& inner : poly.inners()) convert(inner);
    }
    return out;
}

// ---------------------------------------------------------------------------
// repair helpers

std::vector<GeoPoint> clean_ring(const std::vector<GeoPoint>& raw, std::vector<std::string>& diagnostics) {
    std::vector<GeoPoint> pts;
    pts.reserve(raw.size() + 1);
    for (const auto& p : raw) {
        if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) {
            diagnostics.emplace_back("dropped non-finite coordinate");
            continue;
        }
        if (pts.empty() || pts.back() != p) pts.push_back(p);
    }
    while (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
    if (pts.size() < 3) {
        diagnostics.emplace_back("ring with fewer than 3 distinct points dropped");
        return {};
    }
    pts.push_back(pts.front());
    return pts;
}

void canonical_ring(Ring& ring) {
    auto& pts = ring.points;
    if (pts.size() < 2) return;
    if (pts.front() == pts.back()) pts.pop_back();
    auto smallest = std::min_element(pts.begin(), pts.end());
    std::rotate(pts.begin(), smallest, pts.end());
    pts.push_back(pts.front());
}

}  // namespace

// ---------------------------------------------------------------------------

SliverPolicy SliverPolicy::for_frame(const LocalFrame& frame, double min_area_m2) {
    return {min_area_m2, frame.m2_per_deg2()};
}

double SliverPolicy::threshold_deg2() const noexcept {
    const double scale = m2_per_deg2 > 0.0 ? m2_per_deg2 : meters_per_degree() * meters_per_degree();
    return min_area_m2 / scale;
}

double area_m2(const GeoPolygon& shape, const LocalFrame& frame) {
    double a = std::abs(shoelace(shape.outer.points, frame));
    for (const auto& inner : shape.inners) a -= std::abs(shoelace(inner.points, frame));
    return std::max(a, 0.0);
}

double area_m2(const GeoMultiPolygon& shape, const LocalFrame& frame) {
    double total = 0.0;
    for (const auto& poly : shape.polygons) total += area_m2(poly, frame);
    return total;
}

GeoMultiPolygon buffer(const BufferInput& geometry, double radius_m, const LocalFrame& frame) {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m))
        throw std::invalid_argument("buffer radius must be positive");

    bg::strategy::buffer::distance_symmetric<double> distance(radius_m);
    bg::strategy::buffer::side_straight side;
    bg::strategy::buffer::join_round join(kBufferSegments);
    bg::strategy::buffer::end_round end(kBufferSegments);
    bg::strategy::buffer::point_circle circle(kBufferSegments);

    auto local = [&](const GeoPoint& g) {
        const LocalPoint p = frame.to_local(g);
        return BPoint{p.x, p.y};
    };

    BMulti out_local;
    auto buffer_point = [&](const GeoPoint& g) {
        bg::buffer(local(g), out_local, distance, side, join, end, circle);
    };

    try {
        if (const auto* pt = std::get_if<GeoPoint>(&geometry)) {
            buffer_point(*pt);
        } else if (const auto* line = std::get_if<LineString>(&geometry)) {
            BLine l;
            for (const auto& g : line->points) {
                BPoint p = local(g);
                if (l.empty() || !bg::equals(l.back(), p)) l.push_back(p);
            }
            if (l.empty()) throw std::invalid_argument("cannot buffer an empty linestring");
            if (l.size() == 1) {
                buffer_point(line->points.front());
            } else {
                bg::buffer(l, out_local, distance, side, join, end, circle);
            }
        } else {
            const auto& poly = std::get<GeoPolygon>(geometry);
            if (poly.outer.points.size() < 4) throw std::invalid_argument("cannot buffer an empty polygon");
            BPoly p;
            for (const auto& g : poly.outer.points) p.outer().push_back(local(g));
            for (const auto& inner : poly.inners) {
                BRing r;
                for (const auto& g : inner.points) r.push_back(local(g));
                p.inners().push_back(std::move(r));
            }
            bg::correct(p);
            bg::buffer(p, out_local, distance, side, join, end, circle);
        }
    } catch (const bg::exception& e) {
        throw GeometryError(std::string("buffer failed: ") + e.what());
    }

    BMulti out = local_to_geo(out_local, frame);
    bg::correct(out);
    if (!bg::is_valid(out)) return repair(from_b(out), SliverPolicy::for_frame(frame)).shape;
    return from_b(out);
}

GeoMultiPolygon difference(const GeoMultiPolygon& subject, const GeoMultiPolygon& clip, const SliverPolicy& slivers) {
    if (subject.empty()) return {};
    if (clip.empty() || !envelope(subject).intersects(envelope(clip))) return subject;
    return run(cl::ctDifference, to_c(subject), to_c(clip), cl::pftNonZero, slivers, "difference");
}

GeoMultiPolygon unite(const GeoMultiPolygon& a, const GeoMultiPolygon& b, const SliverPolicy& slivers) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return run(cl::ctUnion, to_c(a), to_c(b), cl::pftNonZero, slivers, "union");
}

GeoMultiPolygon intersection(const GeoMultiPolygon& a, const GeoMultiPolygon& b, const SliverPolicy& slivers) {
    if (a.empty() || b.empty() || !envelope(a).intersects(envelope(b))) return {};
    return run(cl::ctIntersection, to_c(a), to_c(b), cl::pftNonZero, slivers, "intersection");
}

GeoMultiPolygon union_all(std::span<const GeoMultiPolygon> shapes, const SliverPolicy& slivers) {
    std::vector<GeoMultiPolygon> level(shapes.begin(), shapes.end());
    std::erase_if(level, [](const GeoMultiPolygon& s) { return s.empty(); });
    if (level.empty()) return {};
    while (level.size() > 1) {
        std::vector<GeoMultiPolygon> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(unite(level[i], level[i + 1], slivers));
        if (level.size() % 2 == 1) next.push_back(std::move(level.back()));
        level = std::move(next);
    }
    return std::move(level.front());
}

RepairResult repair(std::span<const std::vector<GeoPoint>> rings, const SliverPolicy& slivers) {
    RepairResult result;
    cl::Paths paths;
    for (const auto& raw : rings) {
        auto ring = clean_ring(raw, result.diagnostics);
        if (ring.empty()) continue;
        cl::Path path = to_c(ring, true);
        if (path.size() >= 3) paths.push_back(std::move(path));
    }
    if (paths.empty()) {
        if (result.diagnostics.empty()) result.diagnostics.emplace_back("no rings");
        return result;
    }
    try {
        result.shape = canonical(run(cl::ctUnion, paths, {}, cl::pftEvenOdd, slivers, "repair"));
    } catch (const GeometryError& e) {
        result.diagnostics.emplace_back(std::string("unrepairable geometry: ") + e.what());
        return result;
    }
    std::size_t out_rings = 0;
    for (const auto& poly : result.shape.polygons) out_rings += 1 + poly.inners.size();
    if (out_rings != paths.size())
        result.diagnostics.emplace_back("even-odd fill turned " + std::to_string(paths.size()) + " rings into " +
                                        std::to_string(out_rings));
    if (result.shape.empty()) result.diagnostics.emplace_back("area below sliver threshold");
    return result;
}

RepairResult repair(const GeoMultiPolygon& shape, const SliverPolicy& slivers) {
    std::vector<std::vector<GeoPoint>> rings;
    for (const auto& poly : shape.polygons) {
        rings.push_back(poly.outer.points);
        for (const auto& inner : poly.inners) rings.push_back(inner.points);
    }
    return repair(std::span<const std::vector<GeoPoint>>(rings), slivers);
}

GeoPolygon regular_polygon(const GeoPoint& center, double radius_m, int segments, const LocalFrame& frame) {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) throw std::invalid_argument("radius must be positive");
    if (segments < 3) throw std::invalid_argument("a polygon needs at least 3 segments");
    const LocalPoint c = frame.to_local(center);
    GeoPolygon poly;
    poly.outer.points.reserve(static_cast<std::size_t>(segments) + 1);
    for (int k = 0; k < segments; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / segments;
        poly.outer.points.push_back(
            snap(frame.to_geo({c.x + radius_m * std::cos(angle), c.y + radius_m * std::sin(angle)})));
    }
    poly.outer.points.push_back(poly.outer.points.front());
    return poly;
}

GeoPolygon circle_to_polygon(const GeoPoint& center, double radius_m, int segments, const LocalFrame& frame) {
    if (segments < 8) throw std::invalid_argument("circle needs at least 8 segments");
    return regular_polygon(center, radius_m, segments, frame);
}

void orient(GeoMultiPolygon& shape) {
    BMulti b = to_b(shape);
    bg::correct(b);
    shape = from_b(b);
}

GeoMultiPolygon canonical(GeoMultiPolygon shape) {
    orient(shape);
    for (auto& poly : shape.polygons) {
        canonical_ring(poly.outer);
        for (auto& inner : poly.inners) canonical_ring(inner);
        std::sort(poly.inners.begin(), poly.inners.end(),
                  [](const Ring& a, const Ring& b) { return a.points.front() < b.points.front(); });
    }
    std::sort(shape.polygons.begin(), shape.polygons.end(), [](const GeoPolygon& a, const GeoPolygon& b) {
        return a.outer.points.front() < b.outer.points.front();
    });
    return shape;
}

std::optional<std::string> validate(const GeoMultiPolygon& shape) {
    auto check_ring = [](const Ring& r) -> std::optional<std::string> {
        if (r.points.size() < 4) return "ring has fewer than 4 points";
        if (r.points.front() != r.points.back()) return "ring is not closed";
        for (const auto& p : r.points) {
            if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) return "non-finite coordinate";
            if (p.lon < -180.0 || p.lon > 180.0 || p.lat < -90.0 || p.lat > 90.0)
                return "coordinate out of range";
        }
        if (shoelace_deg2(r.points) == 0.0) return "ring has zero area";
        return std::nullopt;
    };
    for (const auto& poly : shape.polygons) {
        if (auto err = check_ring(poly.outer)) return err;
        for (const auto& inner : poly.inners)
            if (auto err = check_ring(inner)) return err;
    }
    std::string reason;
    if (!bg::is_valid(to_b(shape), reason)) return reason;
    return std::nullopt;
}

bool covers(const GeoMultiPolygon& shape, const GeoPoint& p) { return bg::covered_by(to_b(p), to_b(shape)); }

bool within(const GeoPoint& p, const GeoMultiPolygon& shape) { return bg::within(to_b(p), to_b(shape)); }

}  // namespace walkcap::geo
