#pragma once

#include "walkcap/geo/types.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace walkcap::overpass {

struct BBox {
    double south = 0.0;
    double west = 0.0;
    double north = 0.0;
    double east = 0.0;

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct OverpassQuery {
    std::string text;
    BBox bbox;
};

class QueryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bumped when the query text or the expected response shape changes, so
/// stale cache entries stop matching.
inline constexpr int kSchemaVersion = 1;

/// Everything intersecting the boundary's envelope padded by `pad_m` metres
/// (nodes, ways, relations, plus the member nodes of ways and relations) as
/// JSON with inline geometry. The bbox is rounded outwards to 1e-7 degrees.
/// Throws QueryError for an empty boundary or one spanning the antimeridian.
OverpassQuery build_query(const geo::GeoMultiPolygon& boundary, double pad_m, int timeout_s = 180);

/// Same, padded by the largest default buffer radius of the classification table.
OverpassQuery build_query(const geo::GeoMultiPolygon& boundary);

/// WALKCAP_OVERPASS_ENDPOINT when set, otherwise the public overpass-api.de interpreter.
std::string default_endpoint();

/// Hex SHA-256 over the schema version, endpoint and query text.
std::string cache_key(const std::string& query_text, const std::string& endpoint, int schema_version = kSchemaVersion);

using Clock = std::function<std::chrono::system_clock::time_point()>;

/// Response bodies on disk, one file per key, stamped with the fetch time.
/// Safe for concurrent use within a process.
class DiskCache {
public:
    DiskCache(std::filesystem::path dir, std::chrono::seconds ttl = std::chrono::hours(24), Clock clock = {});

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& body);
    /// Deletes expired entries; returns how many were removed.
    std::size_t purge();

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path body_path(const std::string& key) const;
    std::filesystem::path stamp_path(const std::string& key) const;
    bool fresh(std::chrono::system_clock::time_point fetched) const;

    std::filesystem::path dir_;
    std::chrono::seconds ttl_;
    Clock clock_;
    mutable std::mutex mutex_;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Raised by transports when no HTTP response was obtained.
class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    /// Form-encoded POST of `data=<query>`. Throws NetworkError on connection failure.
    virtual HttpResponse post_query(const std::string& endpoint, const std::string& query,
                                    std::chrono::seconds timeout) = 0;
};

/// cpp-httplib backed transport for http:// and https:// endpoints.
class HttplibTransport : public HttpTransport {
public:
    HttpResponse post_query(const std::string& endpoint, const std::string& query,
                            std::chrono::seconds timeout) override;
};

class FetchError : public std::runtime_error {
public:
    enum class Reason { bad_request, http_status, exhausted };

    FetchError(Reason reason, int status, const std::string& message)
        : std::runtime_error(message), reason_(reason), status_(status) {}

    Reason reason() const noexcept { return reason_; }
    /// Last HTTP status seen, 0 when the last attempt failed at the network level.
    int status() const noexcept { return status_; }

private:
    Reason reason_;
    int status_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct ClientConfig {
    std::string endpoint;  // empty -> default_endpoint()
    std::optional<std::filesystem::path> cache_dir;
    std::chrono::seconds cache_ttl = std::chrono::hours(24);
    int max_retries = 3;
    std::chrono::milliseconds first_backoff{1000};  // doubled after every retry
    std::chrono::seconds request_timeout{200};
};

struct FetchStats {
    std::size_t network_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t coalesced = 0;  // callers that waited on another caller's request
};

/// Cache first, then HTTP with retries on 429, 504 and network errors.
/// Concurrent fetches of the same key share one request.
class OverpassClient {
public:
    explicit OverpassClient(ClientConfig config, std::shared_ptr<HttpTransport> transport = nullptr,
                            Sleeper sleeper = {}, Clock clock = {});

    std::string fetch(const OverpassQuery& query);
    std::string fetch(const OverpassQuery& query, const std::string& endpoint);

    FetchStats stats() const;
    const std::string& endpoint() const noexcept { return config_.endpoint; }

private:
    std::string fetch_uncached(const std::string& query, const std::string& endpoint);

    ClientConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleeper_;
    std::unique_ptr<DiskCache> cache_;

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_future<std::string>> in_flight_;
    FetchStats stats_;
};

}  // namespace walkcap::overpass
