#pragma once

#include "walkcap/engine/walkable.hpp"
#include "walkcap/overpass/client.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace walkcap::service {

enum class JobState { queued, running, done, failed };

std::string_view to_string(JobState s) noexcept;

/// Where a job gets its OSM data.
struct DataSource {
    enum class Kind { overpass, extract };
    Kind kind = Kind::overpass;
    std::string extract_id;  // for Kind::extract, an id returned by the upload endpoint
};

struct JobRequest {
    geo::GeoMultiPolygon boundary;
    osm::ComputeOptions options;
    DataSource source;
    nlohmann::json echo;  // the request body as received
};

struct Job {
    std::string id;
    JobState state = JobState::queued;
    double progress = 0.0;
    engine::Phase phase = engine::Phase::fetch;
    std::int64_t created_at = 0;  // unix seconds
    JobRequest request;
    nlohmann::json summary;  // statistics, once done
    std::string error;       // once failed
};

/// Produces the result for one job, reporting through `progress`. The caller
/// calls finish() on the tracker. Exceptions fail the job with their message.
using JobRunner = std::function<engine::WalkableResult(const JobRequest&, engine::ProgressTracker&)>;

struct ServiceConfig {
    std::filesystem::path store_dir;
    double max_area_km2 = 50.0;
    std::size_t workers = 2;
    std::chrono::seconds retention = std::chrono::hours(24);
    engine::EngineConfig engine;
    overpass::ClientConfig overpass;
    std::optional<std::filesystem::path> static_dir;  // built web UI, served at /
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class Service {
public:
    /// Loads persisted jobs. Finished jobs are served again; jobs that were
    /// queued are queued again, jobs that were running are marked failed.
    explicit Service(ServiceConfig config, JobRunner runner = {}, overpass::Clock clock = {});
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response submit(const std::string& body);
    Response status(const std::string& id) const;
    Response result(const std::string& id) const;
    Response capacity(const std::string& body) const;
    Response upload_extract(const std::string& body);

    /// Routes a request by method and path; 404 for anything unknown.
    Response handle(const std::string& method, const std::string& path, const std::string& body);

    /// Deletes finished jobs older than the retention period.
    std::size_t purge();

    std::optional<Job> job(const std::string& id) const;
    const ServiceConfig& config() const noexcept { return config_; }

    /// Registers the REST routes (and static files when configured) on `server`.
    void mount(httplib::Server& server);

private:
    void worker_loop();
    void run_job(const std::string& id);
    void persist(const Job& job) const;
    void load();
    std::string status_body(const Job& job) const;
    std::filesystem::path job_dir(const std::string& id) const;
    std::filesystem::path extract_path(const std::string& id) const;
    engine::WalkableResult default_runner(const JobRequest& request, engine::ProgressTracker& progress);

    ServiceConfig config_;
    JobRunner runner_;
    overpass::Clock clock_;
    std::unique_ptr<overpass::OverpassClient> overpass_;

    mutable std::mutex mutex_;
    std::condition_variable wake_;
    std::map<std::string, Job> jobs_;
    std::map<std::string, std::string> result_bodies_;
    std::deque<std::string> queue_;
    bool stopping_ = false;
    std::vector<std::jthread> workers_;
};

/// JSON error document {"error": message} plus "field" when given.
std::string error_body(const std::string& message, const std::string& field = {});

/// Reads {"boundary": GeoJSON, "options": {...}, "source": {...}}.
/// Throws std::invalid_argument with a readable reason.
JobRequest parse_job_request(const std::string& body);

/// {"walkable_request": JSON Schema, "capacity_request": JSON Schema}, served
/// at GET /api/v1/schema.
nlohmann::json request_schemas();

osm::ComputeOptions options_from_json(const nlohmann::json& options);
nlohmann::json options_to_json(const osm::ComputeOptions& options);

}  // namespace walkcap::service
