#include "walkcap/service/service.hpp"

#include "walkcap/capacity/capacity.hpp"
#include "walkcap/geo/geojson.hpp"
#include "walkcap/osm/parse.hpp"

#include <httplib.h>

#include <fstream>
#include <random>
#include <sstream>

namespace walkcap::service {

using nlohmann::json;

namespace {

constexpr const char* kApi = "/api/v1";

Response json_response(int status, const json& body) { return {status, body.dump()}; }
Response error_response(int status, const std::string& message, const std::string& field = {}) {
    return {status, error_body(message, field)};
}

std::string random_id() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 2; ++i) {
        auto v = rng();
        for (int k = 0; k < 16; ++k, v >>= 4) id += hex[v & 0xF];
    }
    return id;
}

bool is_token(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<JobState> state_from(std::string_view s) {
    for (auto st : {JobState::queued, JobState::running, JobState::done, JobState::failed})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::optional<engine::Phase> phase_from(std::string_view s) {
    for (auto p : {engine::Phase::fetch, engine::Phase::classify, engine::Phase::subtract, engine::Phase::merge})
        if (engine::to_string(p) == s) return p;
    return std::nullopt;
}

json summary_of(const json& result_doc) { return result_doc.at("summary"); }

}  // namespace

std::string_view to_string(JobState s) noexcept {
    switch (s) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::done: return "done";
        case JobState::failed: return "failed";
    }
    return "unknown";
}

std::string error_body(const std::string& message, const std::string& field) {
    json doc{{"error", message}};
    if (!field.empty()) doc["field"] = field;
    return doc.dump();
}

osm::ComputeOptions options_from_json(const json& options) {
    osm::ComputeOptions out;
    if (options.is_null()) return out;
    if (!options.is_object()) throw std::invalid_argument("options must be an object");
    for (const auto& [key, value] : options.items()) {
        bool* target = key == "remove_building_inner_areas" ? &out.remove_building_inner_areas
                       : key == "roads_walkable"            ? &out.roads_walkable
                       : key == "grass_not_walkable"        ? &out.grass_not_walkable
                                                            : nullptr;
        if (target == nullptr) throw std::invalid_argument("unknown option '" + key + "'");
        if (!value.is_boolean()) throw std::invalid_argument("option '" + key + "' must be true or false");
        *target = value.get<bool>();
    }
    return out;
}

json options_to_json(const osm::ComputeOptions& o) {
    return {{"remove_building_inner_areas", o.remove_building_inner_areas},
            {"roads_walkable", o.roads_walkable},
            {"grass_not_walkable", o.grass_not_walkable}};
}

JobRequest parse_job_request(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("request body must be a JSON object");
    if (!doc.contains("boundary")) throw std::invalid_argument("missing 'boundary'");

    JobRequest req;
    try {
        req.boundary = geo::boundary_from_geojson(doc["boundary"]);
    } catch (const geo::GeoJsonError& e) {
        throw std::invalid_argument(std::string("invalid boundary: ") + e.what());
    }
    req.options = options_from_json(doc.value("options", json()));
    if (auto it = doc.find("source"); it != doc.end() && !it->is_null()) {
        if (!it->is_object() || !it->contains("type") || !(*it)["type"].is_string())
            throw std::invalid_argument("source must be an object with a 'type'");
        const auto type = (*it)["type"].get<std::string>();
        if (type == "extract") {
            req.source.kind = DataSource::Kind::extract;
            if (!it->contains("id") || !(*it)["id"].is_string() || !is_token((*it)["id"].get<std::string>()))
                throw std::invalid_argument("extract source needs the 'id' returned by the upload");
            req.source.extract_id = (*it)["id"].get<std::string>();
        } else if (type != "overpass") {
            throw std::invalid_argument("unknown source type '" + type + "'");
        }
    }
    req.echo = std::move(doc);
    return req;
}

Service::Service(ServiceConfig config, JobRunner runner, overpass::Clock clock)
    : config_(std::move(config)),
      runner_(std::move(runner)),
      clock_(clock ? std::move(clock) : overpass::Clock(std::chrono::system_clock::now)) {
    if (config_.store_dir.empty()) throw std::invalid_argument("service needs a store directory");
    std::filesystem::create_directories(config_.store_dir / "jobs");
    std::filesystem::create_directories(config_.store_dir / "extracts");
    if (!config_.overpass.cache_dir) config_.overpass.cache_dir = config_.store_dir / "overpass-cache";
    if (!runner_) {
        overpass_ = std::make_unique<overpass::OverpassClient>(config_.overpass);
        runner_ = [this](const JobRequest& r, engine::ProgressTracker& p) { return default_runner(r, p); };
    }
    load();
    purge();
    for (std::size_t i = 0; i < std::max<std::size_t>(1, config_.workers); ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

Service::~Service() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    workers_.clear();
}

std::filesystem::path Service::job_dir(const std::string& id) const { return config_.store_dir / "jobs" / id; }
std::filesystem::path Service::extract_path(const std::string& id) const {
    return config_.store_dir / "extracts" / (id + ".osm");
}

void Service::persist(const Job& job) const {
    json doc{{"id", job.id},
             {"state", to_string(job.state)},
             {"progress", job.progress},
             {"phase", engine::to_string(job.phase)},
             {"created_at", job.created_at},
             {"request", job.request.echo},
             {"summary", job.summary},
             {"error", job.error}};
    std::filesystem::create_directories(job_dir(job.id));
    write_file(job_dir(job.id) / "job.json", doc.dump());
}

void Service::load() {
    for (const auto& entry : std::filesystem::directory_iterator(config_.store_dir / "jobs")) {
        const auto id = entry.path().filename().string();
        try {
            const auto doc = json::parse(read_file(entry.path() / "job.json"));
            Job job;
            job.id = id;
            job.state = state_from(doc.at("state").get<std::string>()).value();
            job.progress = doc.at("progress").get<double>();
            job.phase = phase_from(doc.at("phase").get<std::string>()).value_or(engine::Phase::fetch);
            job.created_at = doc.at("created_at").get<std::int64_t>();
            job.request = parse_job_request(doc.at("request").dump());
            job.summary = doc.value("summary", json());
            job.error = doc.value("error", "");
            if (job.state == JobState::done) {
                result_bodies_[id] = read_file(entry.path() / "result.geojson");
            } else if (job.state == JobState::running) {
                job.state = JobState::failed;
                job.error = "interrupted by a service restart";
                persist(job);
            } else if (job.state == JobState::queued) {
                queue_.push_back(id);
            }
            jobs_.emplace(id, std::move(job));
        } catch (const std::exception&) {
            // unreadable job directories are left alone
        }
    }
    // restart order: oldest first
    std::sort(queue_.begin(), queue_.end(), [&](const std::string& a, const std::string& b) {
        return std::pair(jobs_[a].created_at, a) < std::pair(jobs_[b].created_at, b);
    });
}

std::size_t Service::purge() {
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(clock_().time_since_epoch()).count();
    std::lock_guard lock(mutex_);
    std::size_t removed = 0;
    for (auto it = jobs_.begin(); it != jobs_.end();) {
        const auto& job = it->second;
        const bool finished = job.state == JobState::done || job.state == JobState::failed;
        if (finished && now - job.created_at > config_.retention.count()) {
            std::error_code ec;
            std::filesystem::remove_all(job_dir(job.id), ec);
            result_bodies_.erase(job.id);
            it = jobs_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

Response Service::submit(const std::string& body) {
    JobRequest request;
    try {
        request = parse_job_request(body);
    } catch (const std::invalid_argument& e) {
        return error_response(400, e.what());
    }
    const auto frame = geo::make_local_frame(request.boundary);
    const double km2 = geo::area_m2(request.boundary, frame) / 1e6;
    if (km2 > config_.max_area_km2) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "boundary covers %.2f km2, the limit is %.2f km2", km2, config_.max_area_km2);
        return error_response(413, msg);
    }
    if (request.source.kind == DataSource::Kind::extract && !std::filesystem::exists(extract_path(request.source.extract_id)))
        return error_response(400, "unknown extract '" + request.source.extract_id + "'");

    purge();
    Job job;
    job.id = random_id();
    job.created_at = std::chrono::duration_cast<std::chrono::seconds>(clock_().time_since_epoch()).count();
    job.request = std::move(request);
    persist(job);
    const auto id = job.id;
    {
        std::lock_guard lock(mutex_);
        jobs_.emplace(id, std::move(job));
        queue_.push_back(id);
    }
    wake_.notify_one();
    return json_response(202, {{"id", id},
                               {"state", to_string(JobState::queued)},
                               {"status", std::string(kApi) + "/walkable/" + id}});
}

std::string Service::status_body(const Job& job) const {
    json doc{{"id", job.id},
             {"state", to_string(job.state)},
             {"progress", job.progress},
             {"phase", engine::to_string(job.phase)},
             {"created_at", job.created_at},
             {"request", {{"options", options_to_json(job.request.options)},
                          {"source", job.request.echo.value("source", json{{"type", "overpass"}})}}}};
    if (job.state == JobState::done) {
        doc["result"] = std::string(kApi) + "/walkable/" + job.id + "/result";
        doc["summary"] = job.summary;
    }
    if (job.state == JobState::failed) doc["error"] = job.error;
    return doc.dump();
}

Response Service::status(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return error_response(404, "unknown job '" + id + "'");
    return {200, status_body(it->second)};
}

Response Service::result(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return error_response(404, "unknown job '" + id + "'");
    if (it->second.state != JobState::done)
        return error_response(409, "job is " + std::string(to_string(it->second.state)));
    return {200, result_bodies_.at(id), "application/geo+json"};
}

std::optional<Job> Service::job(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

Response Service::capacity(const std::string& body) const {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        return error_response(400, std::string("malformed JSON: ") + e.what());
    }
    try {
        if (!doc.is_object()) throw capacity::ParameterError("body", "must be a JSON object");
        auto area = doc.find("walkable_area_m2");
        if (area == doc.end() || !area->is_number())
            throw capacity::ParameterError("walkable_area_m2", "must be a number");
        const auto params = capacity::params_from_json(doc);
        bool floor_values = false;
        if (auto floor = doc.find("floor"); floor != doc.end() && !floor->is_null()) {
            if (!floor->is_boolean()) throw capacity::ParameterError("floor", "must be true or false");
            floor_values = floor->get<bool>();
        }
        return json_response(200, capacity::to_json(capacity::assess(area->get<double>(), params), floor_values));
    } catch (const capacity::ParameterError& e) {
        return error_response(422, e.what(), e.field());
    } catch (const json::exception& e) {
        return error_response(422, e.what());
    }
}

Response Service::upload_extract(const std::string& body) {
    try {
        osm::parse_osm(body);
    } catch (const osm::OsmParseError& e) {
        return error_response(400, std::string("not an OSM extract: ") + e.what());
    }
    const auto id = random_id();
    write_file(extract_path(id), body);
    return json_response(201, {{"id", id}});
}

json request_schemas() {
    const osm::ComputeOptions d;
    auto flag = [](bool def, const char* help) {
        return json{{"type", "boolean"}, {"default", def}, {"description", help}};
    };
    json walkable{
        {"$schema", "https://json-schema.org/draft/2020-12/schema"},
        {"type", "object"},
        {"required", {"boundary"}},
        {"properties",
         {{"boundary",
           {{"type", "object"},
            {"description",
             "GeoJSON (RFC 7946) Polygon, MultiPolygon, Feature or FeatureCollection in lon/lat. "
             "Polygonal members of a collection are merged."}}},
          {"options",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"remove_building_inner_areas",
               flag(d.remove_building_inner_areas, "Building courtyards are private and not walkable.")},
              {"roads_walkable", flag(d.roads_walkable, "Roads become walkable, e.g. closed for an event.")},
              {"grass_not_walkable", flag(d.grass_not_walkable, "Grass areas become obstacles.")}}}}},
          {"source",
           {{"type", "object"},
            {"description", "Where OSM data comes from. Defaults to an Overpass fetch."},
            {"properties",
             {{"type", {{"enum", {"overpass", "extract"}}, {"default", "overpass"}}},
              {"id", {{"type", "string"}, {"description", "Extract id returned by POST /api/v1/extracts."}}}}}}}}}};
    return {{"walkable_request", walkable}, {"capacity_request", capacity::request_schema()}};
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
    const std::string api = kApi;
    if (path.rfind(api + "/", 0) != 0) return error_response(404, "no such endpoint");
    const auto rest = path.substr(api.size());

    auto only = [&](const char* allowed, auto&& fn) -> Response {
        if (method != allowed) return error_response(405, "method not allowed");
        return fn();
    };
    if (rest == "/walkable") return only("POST", [&] { return submit(body); });
    if (rest == "/capacity") return only("POST", [&] { return capacity(body); });
    if (rest == "/extracts") return only("POST", [&] { return upload_extract(body); });
    if (rest == "/schema") return only("GET", [] { return json_response(200, request_schemas()); });
    if (rest == "/health") return only("GET", [] { return json_response(200, {{"status", "ok"}}); });
    if (rest.rfind("/walkable/", 0) == 0) {
        auto tail = rest.substr(std::string("/walkable/").size());
        const bool wants_result = tail.size() > 7 && tail.compare(tail.size() - 7, 7, "/result") == 0;
        if (wants_result) tail.resize(tail.size() - 7);
        if (tail.find('/') != std::string::npos) return error_response(404, "no such endpoint");
        return only("GET", [&] { return wants_result ? result(tail) : status(tail); });
    }
    return error_response(404, "no such endpoint");
}

void Service::mount(httplib::Server& server) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        auto r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get(R"(/api/v1/.*)", forward);
    server.Post(R"(/api/v1/.*)", forward);
    if (config_.static_dir) server.set_mount_point("/", config_.static_dir->string());
}

void Service::worker_loop() {
    for (;;) {
        std::string id;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            id = queue_.front();
            queue_.pop_front();
        }
        run_job(id);
    }
}

void Service::run_job(const std::string& id) {
    JobRequest request;
    {
        std::lock_guard lock(mutex_);
        auto& job = jobs_.at(id);
        job.state = JobState::running;
        request = job.request;
        persist(job);
    }
    engine::ProgressTracker tracker([this, id](double fraction, engine::Phase phase) {
        std::lock_guard lock(mutex_);
        auto& job = jobs_.at(id);
        job.progress = fraction;
        job.phase = phase;
    });
    try {
        auto result = runner_(request, tracker);
        tracker.finish();
        auto doc = engine::to_geojson(result);
        auto body = doc.dump();
        write_file(job_dir(id) / "result.geojson", body);
        std::lock_guard lock(mutex_);
        auto& job = jobs_.at(id);
        job.summary = summary_of(doc);
        job.state = JobState::done;
        result_bodies_[id] = std::move(body);
        persist(job);
    } catch (const std::exception& e) {
        std::lock_guard lock(mutex_);
        auto& job = jobs_.at(id);
        job.state = JobState::failed;
        job.error = e.what();
        persist(job);
    }
}

engine::WalkableResult Service::default_runner(const JobRequest& request, engine::ProgressTracker& progress) {
    progress.report(engine::Phase::fetch, 0.0);
    std::string bytes;
    if (request.source.kind == DataSource::Kind::extract) {
        bytes = read_file(extract_path(request.source.extract_id));
    } else {
        bytes = overpass_->fetch(overpass::build_query(request.boundary));
    }
    progress.report(engine::Phase::fetch, 0.7);
    const auto assembly = osm::assemble(osm::parse_osm(bytes));
    progress.report(engine::Phase::fetch, 1.0);
    return engine::compute_walkable(request.boundary, assembly.features, request.options, progress, config_.engine);
}

}  // namespace walkcap::service
