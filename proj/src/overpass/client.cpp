#include "walkcap/overpass/client.hpp"

#include "walkcap/geo/frame.hpp"
#include "walkcap/osm/classify.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace walkcap::overpass {

namespace {

constexpr double kBBoxStep = 1e7;  // bbox rounding, 1e-7 degree

std::string fmt7(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.7f", v);
    return buf;
}

std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return {};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

struct Url {
    std::string scheme_host_port;
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw NetworkError("endpoint is not an absolute URL: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw NetworkError("unsupported URL scheme: " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

OverpassQuery build_query(const geo::GeoMultiPolygon& boundary, double pad_m, int timeout_s) {
    if (boundary.empty()) throw QueryError("cannot build a query for an empty boundary");
    if (!(pad_m >= 0.0)) throw QueryError("padding must be non-negative");
    const auto env = geo::envelope(boundary);
    if (!env.valid()) throw QueryError("boundary has no extent");
    if (env.max.lon - env.min.lon > 180.0)
        throw QueryError("boundaries spanning the antimeridian are not supported");

    const double per_deg = geo::meters_per_degree();
    // pad longitude at the latitude where a degree is shortest
    const double worst_lat = std::min(89.0, std::max(std::abs(env.min.lat), std::abs(env.max.lat)));
    const double dlat = pad_m / per_deg;
    const double dlon = pad_m / (per_deg * std::cos(worst_lat * std::numbers::pi / 180.0));

    BBox box{std::floor((env.min.lat - dlat) * kBBoxStep) / kBBoxStep,
             std::floor((env.min.lon - dlon) * kBBoxStep) / kBBoxStep,
             std::ceil((env.max.lat + dlat) * kBBoxStep) / kBBoxStep,
             std::ceil((env.max.lon + dlon) * kBBoxStep) / kBBoxStep};
    box.south = std::max(box.south, -90.0);
    box.north = std::min(box.north, 90.0);
    if (box.west < -180.0 || box.east > 180.0)
        throw QueryError("padded boundary crosses the antimeridian, which is not supported");

    const std::string b = fmt7(box.south) + "," + fmt7(box.west) + "," + fmt7(box.north) + "," + fmt7(box.east);
    OverpassQuery q;
    q.bbox = box;
    q.text = "[out:json][timeout:" + std::to_string(timeout_s) + "];\n(\n  node(" + b + ");\n  way(" + b +
             ");\n  relation(" + b + ");\n);\n(._;>;);\nout body geom;\n";
    return q;
}

OverpassQuery build_query(const geo::GeoMultiPolygon& boundary) {
    return build_query(boundary, osm::max_default_buffer_radius());
}

std::string default_endpoint() {
    if (const char* env = std::getenv("WALKCAP_OVERPASS_ENDPOINT"); env != nullptr && *env != '\0') return env;
    return "https://overpass-api.de/api/interpreter";
}

std::string cache_key(const std::string& query_text, const std::string& endpoint, int schema_version) {
    // length-prefixed so no two component tuples share an input
    std::string material = "walkcap-overpass/" + std::to_string(schema_version) + "\n";
    material += std::to_string(endpoint.size()) + ":" + endpoint + "\n";
    material += std::to_string(query_text.size()) + ":" + query_text;

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

DiskCache::DiskCache(std::filesystem::path dir, std::chrono::seconds ttl, Clock clock)
    : dir_(std::move(dir)), ttl_(ttl), clock_(clock ? std::move(clock) : Clock(std::chrono::system_clock::now)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path DiskCache::body_path(const std::string& key) const { return dir_ / (key + ".body"); }
std::filesystem::path DiskCache::stamp_path(const std::string& key) const { return dir_ / (key + ".stamp"); }

bool DiskCache::fresh(std::chrono::system_clock::time_point fetched) const {
    const auto age = clock_() - fetched;
    return age >= std::chrono::seconds(0) && age < ttl_;
}

std::optional<std::string> DiskCache::get(const std::string& key) const {
    std::lock_guard lock(mutex_);
    const auto stamp = read_all(stamp_path(key));
    if (stamp.empty()) return std::nullopt;
    long long seconds = 0;
    try {
        seconds = std::stoll(stamp);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (!fresh(std::chrono::system_clock::time_point(std::chrono::seconds(seconds)))) return std::nullopt;
    if (!std::filesystem::exists(body_path(key))) return std::nullopt;
    return read_all(body_path(key));
}

void DiskCache::put(const std::string& key, const std::string& body) {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(clock_().time_since_epoch()).count();
    // body first: a stamp never points at a missing or partial body
    write_atomically(body_path(key), body);
    write_atomically(stamp_path(key), std::to_string(now));
}

std::size_t DiskCache::purge() {
    std::lock_guard lock(mutex_);
    std::size_t removed = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() != ".stamp") continue;
        const auto key = entry.path().stem().string();
        long long seconds = 0;
        try {
            seconds = std::stoll(read_all(entry.path()));
        } catch (const std::exception&) {
            seconds = 0;
        }
        if (fresh(std::chrono::system_clock::time_point(std::chrono::seconds(seconds)))) continue;
        std::filesystem::remove(entry.path());
        std::filesystem::remove(body_path(key));
        ++removed;
    }
    return removed;
}

HttpResponse HttplibTransport::post_query(const std::string& endpoint, const std::string& query,
                                          std::chrono::seconds timeout) {
    const auto url = split_url(endpoint);
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(timeout);
    client.set_follow_location(true);
    httplib::Params form{{"data", query}};
    auto res = client.Post(url.path, form);
    if (!res) throw NetworkError("request to " + endpoint + " failed: " + httplib::to_string(res.error()));
    return {res->status, std::move(res->body)};
}

OverpassClient::OverpassClient(ClientConfig config, std::shared_ptr<HttpTransport> transport, Sleeper sleeper,
                               Clock clock)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
    if (config_.endpoint.empty()) config_.endpoint = default_endpoint();
    if (config_.cache_dir) cache_ = std::make_unique<DiskCache>(*config_.cache_dir, config_.cache_ttl, std::move(clock));
}

FetchStats OverpassClient::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

std::string OverpassClient::fetch(const OverpassQuery& query) { return fetch(query, config_.endpoint); }

std::string OverpassClient::fetch(const OverpassQuery& query, const std::string& endpoint) {
    const auto key = cache_key(query.text, endpoint);
    std::promise<std::string> promise;
    {
        std::unique_lock lock(mutex_);
        if (auto it = in_flight_.find(key); it != in_flight_.end()) {
            auto shared = it->second;
            ++stats_.coalesced;
            lock.unlock();
            return shared.get();
        }
        if (cache_) {
            if (auto hit = cache_->get(key)) {
                ++stats_.cache_hits;
                return *hit;
            }
        }
        in_flight_.emplace(key, promise.get_future().share());
    }

    try {
        auto body = fetch_uncached(query.text, endpoint);
        if (cache_) cache_->put(key, body);
        std::lock_guard lock(mutex_);
        promise.set_value(body);
        in_flight_.erase(key);
        return body;
    } catch (...) {
        std::lock_guard lock(mutex_);
        promise.set_exception(std::current_exception());
        in_flight_.erase(key);
        throw;
    }
}

std::string OverpassClient::fetch_uncached(const std::string& query, const std::string& endpoint) {
    auto backoff = config_.first_backoff;
    int last_status = 0;
    std::string last_problem;
    for (int attempt = 0;; ++attempt) {
        {
            std::lock_guard lock(mutex_);
            ++stats_.network_calls;
        }
        try {
            auto res = transport_->post_query(endpoint, query, config_.request_timeout);
            last_status = res.status;
            if (res.status == 200) return std::move(res.body);
            if (res.status == 400)
                throw FetchError(FetchError::Reason::bad_request, 400,
                                 "Overpass rejected the query (HTTP 400): " + res.body.substr(0, 300));
            if (res.status != 429 && res.status != 504)
                throw FetchError(FetchError::Reason::http_status, res.status,
                                 "Overpass answered HTTP " + std::to_string(res.status));
            last_problem = "HTTP " + std::to_string(res.status);
        } catch (const NetworkError& e) {
            last_status = 0;
            last_problem = e.what();
        }
        if (attempt >= config_.max_retries)
            throw FetchError(FetchError::Reason::exhausted, last_status,
                             "Overpass request failed after " + std::to_string(config_.max_retries) +
                                 " retries: " + last_problem);
        sleeper_(backoff);
        backoff *= 2;
    }
}

}  // namespace walkcap::overpass
