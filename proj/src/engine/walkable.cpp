#include "walkcap/engine/walkable.hpp"

#include "walkcap/geo/geojson.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <thread>

namespace walkcap::engine {

using geo::GeoMultiPolygon;

namespace {

constexpr std::size_t kMaxMessages = 20;

std::size_t executor_count(const EngineConfig& config) {
    if (config.executors > 0) return config.executors;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to `executors` threads. Work is handed out
// by index, so which thread runs an item never affects where its output goes.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t executors, Fn&& fn) {
    const std::size_t workers = std::min(executors, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);
}

void note(EngineDiagnostics& d, std::string message) {
    if (d.messages.size() < kMaxMessages) d.messages.push_back(std::move(message));
}

std::string label(const osm::AssembledFeature& f) {
    return std::string(osm::to_string(f.source)) + "/" + std::to_string(f.element_id);
}

}  // namespace

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::fetch: return "fetch";
        case Phase::classify: return "classify";
        case Phase::subtract: return "subtract";
        case Phase::merge: return "merge";
    }
    return "unknown";
}

ProgressTracker::ProgressTracker(ProgressSink sink, PhaseWeights weights) : sink_(std::move(sink)), weights_(weights) {}

double ProgressTracker::weight_of(Phase phase) const noexcept {
    switch (phase) {
        case Phase::fetch: return weights_.fetch;
        case Phase::classify: return weights_.classify;
        case Phase::subtract: return weights_.subtract;
        case Phase::merge: return weights_.merge;
    }
    return 0.0;
}

double ProgressTracker::start_of(Phase phase) const noexcept {
    double start = 0.0;
    for (Phase p : {Phase::fetch, Phase::classify, Phase::subtract, Phase::merge}) {
        if (p == phase) break;
        start += weight_of(p);
    }
    return start;
}

void ProgressTracker::report(Phase phase, double fraction) {
    fraction = std::clamp(fraction, 0.0, 1.0);
    // 1.0 belongs to finish(); rounding in the weights must not reach it early
    const double overall = std::min(start_of(phase) + weight_of(phase) * fraction, std::nextafter(1.0, 0.0));
    deliver(overall, phase);
}

void ProgressTracker::finish() {
    std::lock_guard lock(mutex_);
    if (finished_) return;
    finished_ = true;
    last_ = 1.0;
    if (sink_) sink_(1.0, Phase::merge);
}

double ProgressTracker::current() const {
    std::lock_guard lock(mutex_);
    return last_;
}

void ProgressTracker::deliver(double overall, Phase phase) {
    std::lock_guard lock(mutex_);
    if (finished_ || overall <= last_) return;
    last_ = overall;
    if (sink_) sink_(overall, phase);
}

GeoMultiPolygon obstacle_geometry(const osm::AssembledFeature& feature,
                                  const osm::ObstacleClassification& classification,
                                  const osm::ComputeOptions& options, const geo::LocalFrame& frame) {
    if (const auto* shape = std::get_if<GeoMultiPolygon>(&feature.geometry)) {
        GeoMultiPolygon area = *shape;
        if (classification.category == osm::Category::building && options.remove_building_inner_areas)
            for (auto& poly : area.polygons) poly.inners.clear();
        if (geo::validate(area)) {
            auto repaired = geo::repair(area);
            if (repaired.shape.empty())
                throw geo::GeometryError(repaired.diagnostics.empty() ? "unusable polygon" : repaired.diagnostics.front());
            area = std::move(repaired.shape);
        }
        return area;
    }
    if (!(classification.buffer_radius > 0.0)) return {};
    if (const auto* p = std::get_if<geo::GeoPoint>(&feature.geometry))
        return geo::buffer(*p, classification.buffer_radius, frame);
    return geo::buffer(std::get<geo::LineString>(feature.geometry), classification.buffer_radius, frame);
}

std::vector<std::vector<std::size_t>> plan_batches(std::span<const Obstacle> obstacles, std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    std::vector<std::size_t> order(obstacles.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return obstacles[a].key < obstacles[b].key; });
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < order.size(); i += batch_size)
        batches.emplace_back(order.begin() + i, order.begin() + std::min(order.size(), i + batch_size));
    return batches;
}

GeoMultiPolygon union_obstacles(std::span<const Obstacle> obstacles, const EngineConfig& config,
                                const geo::SliverPolicy& slivers, ProgressTracker* progress) {
    const auto batches = plan_batches(obstacles, config.batch_size);
    if (batches.empty()) {
        if (progress) progress->report(Phase::subtract, 1.0);
        return {};
    }
    const std::size_t executors = executor_count(config);
    // one unit per batch union and one per pairwise merge
    const double units = static_cast<double>(2 * batches.size() - 1);
    std::atomic<std::size_t> done{0};
    auto tick = [&] {
        const std::size_t n = ++done;
        if (progress) progress->report(Phase::subtract, static_cast<double>(n) / units);
    };

    std::vector<GeoMultiPolygon> level(batches.size());
    parallel_for(batches.size(), executors, [&](std::size_t b) {
        std::vector<GeoMultiPolygon> shapes;
        shapes.reserve(batches[b].size());
        for (std::size_t i : batches[b]) shapes.push_back(obstacles[i].shape);
        level[b] = geo::union_all(shapes, slivers);
        tick();
    });

    while (level.size() > 1) {
        std::vector<GeoMultiPolygon> next((level.size() + 1) / 2);
        parallel_for(level.size() / 2, executors, [&](std::size_t k) {
            next[k] = geo::unite(level[2 * k], level[2 * k + 1], slivers);
            tick();
        });
        if (level.size() % 2 == 1) next.back() = std::move(level.back());
        level = std::move(next);
    }
    return std::move(level.front());
}

WalkableResult compute_walkable(const GeoMultiPolygon& boundary, std::span<const osm::AssembledFeature> features,
                                const osm::ComputeOptions& options, ProgressTracker& progress,
                                const EngineConfig& config) {
    if (boundary.empty()) throw BoundaryError("boundary is empty");
    if (auto reason = geo::validate(boundary)) throw BoundaryError("invalid boundary: " + *reason);

    const auto frame = geo::make_local_frame(boundary);
    const auto slivers = geo::SliverPolicy::for_frame(frame);
    const auto extent = geo::envelope(boundary);
    const std::size_t executors = executor_count(config);

    WalkableResult result;
    auto& diag = result.diagnostics;
    diag.features = features.size();

    // Classification and per-feature geometry are independent; slots keep the
    // outcome in input order so the diagnostics do not depend on scheduling.
    struct Slot {
        osm::ObstacleClassification classification;
        std::optional<GeoMultiPolygon> shape;
        std::string error;
    };
    std::vector<Slot> slots(features.size());
    std::atomic<std::size_t> classified{0};
    progress.report(Phase::classify, 0.0);
    parallel_for(features.size(), executors, [&](std::size_t i) {
        const auto& f = features[i];
        auto& slot = slots[i];
        slot.classification = osm::classify(f.tags, f.kind(), options);
        if (slot.classification.verdict == osm::Verdict::obstacle) {
            try {
                slot.shape = obstacle_geometry(f, slot.classification, options, frame);
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
        }
        const std::size_t n = ++classified;
        progress.report(Phase::classify, static_cast<double>(n) / static_cast<double>(features.size()));
    });

    std::vector<Obstacle> obstacles;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        auto& slot = slots[i];
        switch (slot.classification.verdict) {
            case osm::Verdict::irrelevant: ++diag.ignored; continue;
            case osm::Verdict::walkable_override: ++diag.overrides; continue;
            case osm::Verdict::obstacle: break;
        }
        if (!slot.shape) {
            ++diag.skipped;
            note(diag, label(f) + ": " + slot.error);
            continue;
        }
        if (slot.shape->empty()) {
            ++diag.skipped;
            note(diag, label(f) + ": empty obstacle geometry");
            continue;
        }
        if (!geo::envelope(*slot.shape).intersects(extent)) {
            ++diag.outside;
            continue;
        }
        ++diag.obstacles;
        obstacles.push_back({{f.source, f.element_id}, std::move(*slot.shape)});
    }
    progress.report(Phase::classify, 1.0);

    const auto blocked = union_obstacles(obstacles, config, slivers, &progress);

    progress.report(Phase::merge, 0.0);
    result.pedestrian_spaces = geo::canonical(geo::difference(boundary, blocked, slivers));
    progress.report(Phase::merge, 0.8);

    result.total_area_m2 = geo::area_m2(boundary, frame);
    result.polygon_areas_m2.reserve(result.pedestrian_spaces.size());
    for (const auto& poly : result.pedestrian_spaces.polygons) {
        result.polygon_areas_m2.push_back(geo::area_m2(poly, frame));
        result.walkable_area_m2 += result.polygon_areas_m2.back();
    }
    result.walkable_area_m2 = std::clamp(result.walkable_area_m2, 0.0, result.total_area_m2);
    result.walkable_percent =
        result.total_area_m2 > 0.0 ? 100.0 * result.walkable_area_m2 / result.total_area_m2 : 0.0;
    progress.report(Phase::merge, 1.0);
    return result;
}

WalkableResult compute_walkable(const GeoMultiPolygon& boundary, std::span<const osm::AssembledFeature> features,
                                const osm::ComputeOptions& options, const ProgressSink& sink,
                                const EngineConfig& config) {
    ProgressTracker progress(sink);
    progress.report(Phase::fetch, 1.0);
    auto result = compute_walkable(boundary, features, options, progress, config);
    progress.finish();
    return result;
}

nlohmann::json to_geojson(const WalkableResult& result) {
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t i = 0; i < result.pedestrian_spaces.polygons.size(); ++i) {
        features.push_back({{"type", "Feature"},
                            {"geometry", geo::to_geojson(result.pedestrian_spaces.polygons[i])},
                            {"properties", {{"area_m2", result.polygon_areas_m2.at(i)}}}});
    }
    const auto& d = result.diagnostics;
    return {{"type", "FeatureCollection"},
            {"features", std::move(features)},
            {"summary",
             {{"total_area_m2", result.total_area_m2},
              {"walkable_area_m2", result.walkable_area_m2},
              {"walkable_percent", result.walkable_percent},
              {"diagnostics",
               {{"features", d.features},
                {"obstacles", d.obstacles},
                {"overrides", d.overrides},
                {"ignored", d.ignored},
                {"outside", d.outside},
                {"skipped", d.skipped},
                {"messages", d.messages}}}}}};
}

}  // namespace walkcap::engine
