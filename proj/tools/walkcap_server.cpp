#include "walkcap/service/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <iostream>

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string store = "walkcap-store";
    std::string cache_dir;
    std::string endpoint;
    std::string static_dir;
    double max_area_km2 = 50.0;
    std::size_t workers = 2;
    std::size_t threads = 0;
    int retention_hours = 24;

    CLI::App app("Walkable area and carrying capacity REST service.");
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML or INI file; keys are the long option names, e.g. port = 8080");
    app.add_option("--host", host, "Address to listen on")->envname("WALKCAP_HOST");
    app.add_option("--port", port, "Port to listen on")->envname("WALKCAP_PORT")->check(CLI::Range(0, 65535));
    app.add_option("--store", store, "Directory for jobs, results and uploaded extracts")->envname("WALKCAP_STORE");
    app.add_option("--cache-dir", cache_dir, "Overpass response cache, default <store>/overpass-cache")
        ->envname("WALKCAP_CACHE_DIR");
    app.add_option("--overpass-endpoint", endpoint, "Overpass interpreter URL")->envname("WALKCAP_OVERPASS_ENDPOINT");
    app.add_option("--max-area-km2", max_area_km2, "Largest boundary accepted")->envname("WALKCAP_MAX_AREA_KM2");
    app.add_option("--workers", workers, "Jobs computed at the same time")->envname("WALKCAP_WORKERS");
    app.add_option("--threads", threads, "Geometry threads per job, 0 uses every core")->envname("WALKCAP_THREADS");
    app.add_option("--retention-hours", retention_hours, "Finished jobs are deleted after this many hours")
        ->envname("WALKCAP_RETENTION_HOURS");
    app.add_option("--static-dir", static_dir, "Built web UI served at /")->envname("WALKCAP_STATIC_DIR");
    CLI11_PARSE(app, argc, argv);

    walkcap::service::ServiceConfig config;
    config.store_dir = store;
    config.max_area_km2 = max_area_km2;
    config.workers = workers;
    config.retention = std::chrono::hours(retention_hours);
    config.engine.executors = threads;
    config.overpass.endpoint = endpoint;
    config.overpass.cache_dir = cache_dir.empty() ? std::filesystem::path(store) / "overpass-cache"
                                                  : std::filesystem::path(cache_dir);
    if (!static_dir.empty()) config.static_dir = static_dir;

    try {
        walkcap::service::Service service(config);
        httplib::Server server;
        service.mount(server);
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);

        std::jthread janitor([&service](std::stop_token stop) {
            std::mutex m;
            std::condition_variable_any cv;
            std::unique_lock lock(m);
            while (!cv.wait_for(lock, stop, std::chrono::minutes(10), [&stop] { return stop.stop_requested(); })) service.purge();
        });

        if (port == 0) port = server.bind_to_any_port(host);
        else if (!server.bind_to_port(host, port)) {
            std::cerr << "cannot listen on " << host << ":" << port << "\n";
            return 1;
        }
        std::cerr << "listening on http://" << host << ":" << port << "\n";
        server.listen_after_bind();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
