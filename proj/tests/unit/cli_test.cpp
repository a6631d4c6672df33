#include "walkcap/cli/cli.hpp"

#include "../support/files.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

using namespace walkcap;
using nlohmann::json;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("walkcap-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "walkcap");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return testing::fixture_path(name).string(); }

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("fixture run writes the walkable area and a report matching the formulas") {
        TempDir dir;
        const auto r = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file",
                            fixture("lisbon_small.osm"), "--out", dir / "w.geojson", "--report", dir / "r.json"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("ECC") != std::string::npos);

        const auto walkable = json::parse(testing::read_file(dir / "w.geojson"));
        const auto report = json::parse(testing::read_file(dir / "r.json"));
        CHECK(walkable["type"] == "FeatureCollection");
        const double area = walkable["summary"]["walkable_area_m2"].get<double>();
        CHECK(area > 0.0);
        CHECK(report["inputs"]["walkable_area_m2"].get<double>() == area);

        // hand-written chain, defaults 2 m2, Rf 2.5, cf 0.7945 and 0.8219, Mc 0.7775
        const double pcc = area / 2.0 * 2.5;
        const double rcc = pcc * 0.7945 * 0.8219;
        const double ecc = rcc * 0.7775;
        CHECK(report["pcc"].get<double>() == doctest::Approx(pcc).epsilon(1e-12));
        CHECK(report["rcc"].get<double>() == doctest::Approx(rcc).epsilon(1e-12));
        CHECK(report["ecc"].get<double>() == doctest::Approx(ecc).epsilon(1e-12));
    }

    TEST_CASE("parameters and corrective factors from flags") {
        TempDir dir;
        const auto r = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file",
                            fixture("lisbon_small.json"), "--area-per-pedestrian", "4", "--rotation-factor", "3",
                            "--cf", "noise=0.5", "--cf", "rain=0.8", "--management-capacity", "0.5", "--report",
                            dir / "r.json"});
        REQUIRE(r.code == 0);
        const auto report = json::parse(testing::read_file(dir / "r.json"));
        const double area = report["inputs"]["walkable_area_m2"].get<double>();
        CHECK(report["inputs"]["corrective_factors"] ==
              json::parse(R"([{"label":"noise","value":0.5},{"label":"rain","value":0.8}])"));
        CHECK(report["ecc"].get<double>() == doctest::Approx(area / 4.0 * 3.0 * 0.5 * 0.8 * 0.5).epsilon(1e-12));
    }

    TEST_CASE("option flags change the walkable area") {
        TempDir dir;
        auto area = [&](std::vector<std::string> extra) {
            std::vector<std::string> args{"--boundary", fixture("option_scene_boundary.geojson"), "--osm-file",
                                          fixture("option_scene.osm"), "--report", dir / "r.json"};
            args.insert(args.end(), extra.begin(), extra.end());
            REQUIRE(run(args).code == 0);
            return json::parse(testing::read_file(dir / "r.json"))["inputs"]["walkable_area_m2"].get<double>();
        };
        const double base = area({});
        CHECK(area({"--roads-walkable"}) - base == doctest::Approx(1200).epsilon(1e-3));
        CHECK(area({"--grass-not-walkable"}) - base == doctest::Approx(-600).epsilon(1e-3));
        CHECK(area({"--keep-building-inner"}) - base == doctest::Approx(100).epsilon(1e-3));
    }

    TEST_CASE("outputs are byte stable across thread counts") {
        TempDir dir;
        auto outputs = [&](const std::string& threads) {
            REQUIRE(run({"--boundary", fixture("option_scene_boundary.geojson"), "--osm-file",
                         fixture("option_scene.json"), "--threads", threads, "--out", dir / "w.geojson", "--report",
                         dir / "r.json"})
                        .code == 0);
            return testing::read_file(dir / "w.geojson") + testing::read_file(dir / "r.json");
        };
        const auto one = outputs("1");
        CHECK(outputs("4") == one);
        CHECK(outputs("16") == one);
    }

    TEST_CASE("progress bar goes to stderr") {
        const auto r = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file",
                            fixture("lisbon_small.osm"), "--progress"});
        REQUIRE(r.code == 0);
        CHECK(r.err.find("100%") != std::string::npos);
        CHECK(r.out.find('%') != std::string::npos);
        CHECK(r.out.find('\r') == std::string::npos);
    }

    TEST_CASE("usage errors exit 2") {
        auto missing = run({"--osm-file", fixture("lisbon_small.osm")});
        CHECK(missing.code == 2);
        CHECK(missing.err.find("--boundary") != std::string::npos);
        CHECK(missing.err.find("Usage") != std::string::npos);

        auto cf = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file",
                       fixture("lisbon_small.osm"), "--cf", "humidity=1.2"});
        CHECK(cf.code == 2);
        CHECK(cf.err.find("humidity=1.2") != std::string::npos);
        CHECK(cf.err.find("[0, 1]") != std::string::npos);

        CHECK(run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file", fixture("lisbon_small.osm"),
                   "--cf", "humidity"})
                  .code == 2);
        CHECK(run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file", fixture("lisbon_small.osm"),
                   "--management-capacity", "1.5"})
                  .code == 2);
        CHECK(run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file", fixture("lisbon_small.osm"),
                   "--area-per-pedestrian", "0"})
                  .code == 2);
        CHECK(run({"--boundary", "/nonexistent/boundary.geojson", "--osm-file", fixture("lisbon_small.osm")}).code == 2);
        CHECK(run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file", fixture("lisbon_small.osm"),
                   "--overpass-endpoint", "http://localhost:1/"})
                  .code == 2);
        CHECK(run({"--frobnicate"}).code == 2);

        auto help = run({"--help"});
        CHECK(help.code == 0);
        CHECK(help.out.find("0.7775") != std::string::npos);
    }

    TEST_CASE("data source failures exit 3") {
        TempDir dir;
        std::ofstream(dir / "broken.osm") << "<osm><node id=\"1\" lat=\"38.7\"";
        auto broken = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file", dir / "broken.osm"});
        CHECK(broken.code == 3);

        httplib::Server server;
        server.Post("/api/interpreter", [](const httplib::Request&, httplib::Response& res) {
            res.status = 400;
            res.set_content("syntax error", "text/plain");
        });
        const int port = server.bind_to_any_port("127.0.0.1");
        std::jthread t([&] { server.listen_after_bind(); });
        server.wait_until_ready();
        auto rejected = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--no-cache",
                             "--overpass-endpoint", "http://127.0.0.1:" + std::to_string(port) + "/api/interpreter"});
        server.stop();
        CHECK(rejected.code == 3);
        CHECK(rejected.err.find("400") != std::string::npos);
    }

    TEST_CASE("overpass data is fetched and used") {
        TempDir dir;
        const auto body = testing::read_fixture("lisbon_small.json");
        std::atomic<int> calls{0};
        httplib::Server server;
        server.Post("/api/interpreter", [&](const httplib::Request& req, httplib::Response& res) {
            ++calls;
            CHECK(req.get_param_value("data").find("out body geom") != std::string::npos);
            res.set_content(body, "application/json");
        });
        const int port = server.bind_to_any_port("127.0.0.1");
        std::jthread t([&] { server.listen_after_bind(); });
        server.wait_until_ready();
        const auto url = "http://127.0.0.1:" + std::to_string(port) + "/api/interpreter";
        auto fetched = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--overpass-endpoint", url,
                            "--cache-dir", dir / "cache", "--report", dir / "a.json"});
        auto cached = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--overpass-endpoint", url,
                           "--cache-dir", dir / "cache", "--report", dir / "b.json"});
        server.stop();
        CHECK(fetched.code == 0);
        CHECK(cached.code == 0);
        CHECK(calls.load() == 1);
        auto local = run({"--boundary", fixture("lisbon_small_boundary.geojson"), "--osm-file",
                          fixture("lisbon_small.json"), "--report", dir / "c.json"});
        CHECK(testing::read_file(dir / "a.json") == testing::read_file(dir / "c.json"));
        CHECK(testing::read_file(dir / "b.json") == testing::read_file(dir / "c.json"));
    }

    TEST_CASE("geometry failures exit 4") {
        TempDir dir;
        std::ofstream(dir / "point.geojson") << R"({"type":"Point","coordinates":[-9.14,38.71]})";
        CHECK(run({"--boundary", dir / "point.geojson", "--osm-file", fixture("lisbon_small.osm")}).code == 4);
        std::ofstream(dir / "garbage.geojson") << "{ not json";
        CHECK(run({"--boundary", dir / "garbage.geojson", "--osm-file", fixture("lisbon_small.osm")}).code == 4);
        std::ofstream(dir / "line.geojson")
            << R"({"type":"Polygon","coordinates":[[[-9.14,38.71],[-9.13,38.71],[-9.12,38.71],[-9.14,38.71]]]})";
        CHECK(run({"--boundary", dir / "line.geojson", "--osm-file", fixture("lisbon_small.osm")}).code == 4);
    }
}
