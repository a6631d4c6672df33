#pragma once

#include "walkcap/geo/frame.hpp"
#include "walkcap/geo/ops.hpp"
#include "walkcap/geo/types.hpp"
#include "walkcap/osm/assemble.hpp"
#include "walkcap/osm/classify.hpp"

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace walkcap::engine {

enum class Phase { fetch, classify, subtract, merge };

std::string_view to_string(Phase phase) noexcept;

/// Receives the overall job fraction in [0, 1] and the phase that produced it.
using ProgressSink = std::function<void(double fraction, Phase phase)>;

/// Share of the overall fraction given to each phase.
struct PhaseWeights {
    double fetch = 0.2;
    double classify = 0.1;
    double subtract = 0.6;
    double merge = 0.1;
};

/// Folds per-phase progress into one overall fraction and forwards it to a
/// sink. Thread-safe. Values that would move backwards are dropped, and 1.0
/// is delivered once, by finish().
class ProgressTracker {
public:
    explicit ProgressTracker(ProgressSink sink = {}, PhaseWeights weights = {});

    /// `fraction` is the progress inside `phase`, clamped to [0, 1].
    void report(Phase phase, double fraction);
    void finish();
    double current() const;

private:
    double start_of(Phase phase) const noexcept;
    double weight_of(Phase phase) const noexcept;
    void deliver(double overall, Phase phase);

    ProgressSink sink_;
    PhaseWeights weights_;
    mutable std::mutex mutex_;
    double last_ = 0.0;
    bool finished_ = false;
};

class BoundaryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EngineConfig {
    std::size_t executors = 0;   // 0 -> hardware concurrency
    std::size_t batch_size = 16;
};

struct EngineDiagnostics {
    std::size_t features = 0;
    std::size_t obstacles = 0;   // features subtracted
    std::size_t overrides = 0;   // walkable overrides kept out of the obstacle set
    std::size_t ignored = 0;     // classified irrelevant
    std::size_t outside = 0;     // obstacles whose extent misses the boundary
    std::size_t skipped = 0;     // obstacle geometry that could not be built
    std::vector<std::string> messages;

    friend bool operator==(const EngineDiagnostics&, const EngineDiagnostics&) = default;
};

struct WalkableResult {
    geo::GeoMultiPolygon pedestrian_spaces;
    std::vector<double> polygon_areas_m2;  // parallel to pedestrian_spaces.polygons
    double total_area_m2 = 0.0;
    double walkable_area_m2 = 0.0;
    double walkable_percent = 0.0;
    EngineDiagnostics diagnostics;

    friend bool operator==(const WalkableResult&, const WalkableResult&) = default;
};

/// Identifies an obstacle by its source element. Batches are ordered by it.
struct ObstacleKey {
    osm::ElementKind kind = osm::ElementKind::node;
    osm::ElementId id = 0;

    friend auto operator<=>(const ObstacleKey&, const ObstacleKey&) = default;
};

struct Obstacle {
    ObstacleKey key;
    geo::GeoMultiPolygon shape;
};

/// Area a feature takes away, or an empty shape when it takes none.
/// Points and lines are buffered by the classification radius; polygons are
/// used as they are, except that building courtyards are filled when
/// `remove_building_inner_areas` is set. Throws geo::GeometryError when the
/// geometry cannot be built.
geo::GeoMultiPolygon obstacle_geometry(const osm::AssembledFeature& feature,
                                       const osm::ObstacleClassification& classification,
                                       const osm::ComputeOptions& options, const geo::LocalFrame& frame);

/// Index lists into `obstacles`, ascending by key, `batch_size` per batch
/// with a shorter last batch. Throws std::invalid_argument for batch_size 0.
std::vector<std::vector<std::size_t>> plan_batches(std::span<const Obstacle> obstacles, std::size_t batch_size);

/// Union of all obstacles: each batch is unioned on some executor, then the
/// batch unions are merged pairwise, level by level, always pairing batch 2k
/// with 2k + 1. The result does not depend on the executor count.
/// Reports the subtract phase.
geo::GeoMultiPolygon union_obstacles(std::span<const Obstacle> obstacles, const EngineConfig& config,
                                     const geo::SliverPolicy& slivers = {}, ProgressTracker* progress = nullptr);

/// boundary minus the union of every obstacle feature, with area statistics
/// measured in the boundary's local frame. Reports the classify, subtract and
/// merge phases; the caller owns the fetch phase and finish().
WalkableResult compute_walkable(const geo::GeoMultiPolygon& boundary, std::span<const osm::AssembledFeature> features,
                                const osm::ComputeOptions& options, ProgressTracker& progress,
                                const EngineConfig& config = {});

/// Convenience for callers without a fetch phase: reports it complete up front
/// and delivers 1.0 at the end.
WalkableResult compute_walkable(const geo::GeoMultiPolygon& boundary, std::span<const osm::AssembledFeature> features,
                                const osm::ComputeOptions& options, const ProgressSink& sink = {},
                                const EngineConfig& config = {});

/// FeatureCollection with one Polygon feature per pedestrian space carrying
/// "area_m2", plus a top-level "summary" member with the statistics.
nlohmann::json to_geojson(const WalkableResult& result);

}  // namespace walkcap::engine
