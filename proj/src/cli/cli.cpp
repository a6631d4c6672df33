#include "walkcap/cli/cli.hpp"

#include "walkcap/capacity/capacity.hpp"
#include "walkcap/engine/walkable.hpp"
#include "walkcap/geo/geojson.hpp"
#include "walkcap/geo/ops.hpp"
#include "walkcap/osm/assemble.hpp"
#include "walkcap/osm/parse.hpp"
#include "walkcap/overpass/client.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace walkcap::cli {

namespace {

struct Args {
    std::string boundary;
    std::string overpass_endpoint;
    std::string osm_file;
    std::string cache_dir;
    bool no_cache = false;
    bool roads_walkable = false;
    bool grass_not_walkable = false;
    bool keep_building_inner = false;
    double area_per_pedestrian = 2.0;
    double rotation_factor = 2.5;
    std::vector<std::string> cf;
    double management_capacity = 0.7775;
    std::string out;
    std::string report;
    std::size_t threads = 0;
    bool progress = false;
};

// Raised for problems that map onto one exit code.
struct Failure {
    int code;
    std::string message;
};

std::string read_file(const std::string& path, int code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{code, "cannot read " + path};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Failure{failure, "cannot write " + path};
}

std::optional<std::filesystem::path> default_cache_dir() {
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0')
        return std::filesystem::path(xdg) / "walkcap" / "overpass";
    if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0')
        return std::filesystem::path(home) / ".cache" / "walkcap" / "overpass";
    return std::nullopt;
}

capacity::CapacityParams capacity_params(const Args& a) {
    capacity::CapacityParams p;
    p.area_per_pedestrian = a.area_per_pedestrian;
    p.rotation_factor = a.rotation_factor;
    p.management_capacity = a.management_capacity;
    if (!a.cf.empty()) {
        p.corrective_factors.clear();
        for (const auto& item : a.cf) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw Failure{usage, "--cf expects label=fraction, got '" + item + "'"};
            const auto label = item.substr(0, eq);
            const auto text = item.substr(eq + 1);
            double value = 0.0;
            std::size_t used = 0;
            try {
                value = std::stod(text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != text.size())
                throw Failure{usage, "--cf " + item + ": '" + text + "' is not a number"};
            if (!(value >= 0.0 && value <= 1.0))
                throw Failure{usage, "--cf " + item + ": fraction " + text + " is outside [0, 1]"};
            p.corrective_factors.push_back({label, value});
        }
    }
    try {
        capacity::validate(p);
    } catch (const capacity::ParameterError& e) {
        throw Failure{usage, std::string("invalid parameter ") + e.what()};
    }
    return p;
}

class ProgressBar {
public:
    explicit ProgressBar(std::ostream& err) : err_(err) {}

    void operator()(double fraction, engine::Phase phase) {
        const int percent = static_cast<int>(std::floor(fraction * 100.0));
        if (percent == shown_ && phase == phase_) return;
        shown_ = percent;
        phase_ = phase;
        constexpr int width = 30;
        const int filled = percent * width / 100;
        err_ << '\r' << '[' << std::string(filled, '#') << std::string(width - filled, '.') << "] ";
        char buf[8];
        std::snprintf(buf, sizeof buf, "%3d%%", percent);
        err_ << buf << ' ' << (percent == 100 ? std::string_view("done") : engine::to_string(phase)) << "    ";
        if (percent == 100) err_ << '\n';
        err_.flush();
    }

private:
    std::ostream& err_;
    int shown_ = -1;
    engine::Phase phase_ = engine::Phase::fetch;
};

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

int execute(const Args& a, std::ostream& out, std::ostream& err) {
    const auto params = capacity_params(a);

    geo::GeoMultiPolygon boundary;
    try {
        boundary = geo::boundary_from_geojson(read_file(a.boundary, usage));
    } catch (const geo::GeoJsonError& e) {
        throw Failure{geometry, "invalid boundary in " + a.boundary + ": " + e.what()};
    } catch (const nlohmann::json::exception& e) {
        throw Failure{geometry, "invalid boundary in " + a.boundary + ": " + e.what()};
    }

    std::optional<ProgressBar> bar;
    if (a.progress) bar.emplace(err);
    engine::ProgressTracker tracker(bar ? engine::ProgressSink([&](double f, engine::Phase p) { (*bar)(f, p); })
                                        : engine::ProgressSink{});
    tracker.report(engine::Phase::fetch, 0.0);

    std::string bytes;
    if (!a.osm_file.empty()) {
        bytes = read_file(a.osm_file, data_source);
    } else {
        overpass::ClientConfig config;
        config.endpoint = a.overpass_endpoint;
        if (!a.no_cache) config.cache_dir = a.cache_dir.empty() ? default_cache_dir() : std::filesystem::path(a.cache_dir);
        overpass::OverpassQuery query;
        try {
            query = overpass::build_query(boundary);
        } catch (const overpass::QueryError& e) {
            throw Failure{geometry, e.what()};
        }
        try {
            overpass::OverpassClient client(config);
            bytes = client.fetch(query);
        } catch (const std::exception& e) {
            throw Failure{data_source, e.what()};
        }
    }
    tracker.report(engine::Phase::fetch, 0.7);

    osm::Assembly assembly;
    try {
        assembly = osm::assemble(osm::parse_osm(bytes));
    } catch (const osm::OsmParseError& e) {
        throw Failure{data_source, e.what()};
    }
    tracker.report(engine::Phase::fetch, 1.0);

    osm::ComputeOptions options;
    options.roads_walkable = a.roads_walkable;
    options.grass_not_walkable = a.grass_not_walkable;
    options.remove_building_inner_areas = !a.keep_building_inner;

    engine::EngineConfig config;
    config.executors = a.threads;

    engine::WalkableResult result;
    try {
        result = engine::compute_walkable(boundary, assembly.features, options, tracker, config);
    } catch (const engine::BoundaryError& e) {
        throw Failure{geometry, e.what()};
    } catch (const geo::GeometryError& e) {
        throw Failure{geometry, e.what()};
    }
    tracker.finish();

    const auto report = capacity::assess(result.walkable_area_m2, params);
    if (!a.out.empty()) write_file(a.out, engine::to_geojson(result).dump(2) + "\n");
    if (!a.report.empty()) write_file(a.report, capacity::to_json(report).dump(2) + "\n");

    out << "walkable area  " << fixed(result.walkable_area_m2, 2) << " m2 of " << fixed(result.total_area_m2, 2)
        << " m2 (" << fixed(result.walkable_percent, 2) << "%) in " << result.pedestrian_spaces.size()
        << " pedestrian spaces\n";
    out << "PCC " << fixed(report.pcc, 2) << "  RCC " << fixed(report.rcc, 2) << "  ECC " << fixed(report.ecc, 2)
        << " persons/day\n";
    const auto& d = result.diagnostics;
    if (d.skipped > 0) err << "warning: " << d.skipped << " features could not be used\n";
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Args a;
    CLI::App app("Walkable area and tourism carrying capacity of an urban area, from OpenStreetMap data.",
                 args.empty() ? "walkcap" : args.front());
    app.option_defaults()->always_capture_default();

    app.add_option("--boundary", a.boundary, "GeoJSON Polygon, MultiPolygon, Feature or FeatureCollection in lon/lat")
        ->required()
        ->check(CLI::ExistingFile);
    auto* endpoint = app.add_option("--overpass-endpoint", a.overpass_endpoint,
                                    "Overpass interpreter URL to fetch OSM data from. Used when --osm-file is not "
                                    "given; defaults to $WALKCAP_OVERPASS_ENDPOINT or the public overpass-api.de");
    auto* file = app.add_option("--osm-file", a.osm_file, "Read OSM data from a local .osm XML or Overpass JSON file")
                     ->check(CLI::ExistingFile);
    endpoint->excludes(file);
    app.add_option("--cache-dir", a.cache_dir,
                   "Directory for cached Overpass responses (24 h). Default $XDG_CACHE_HOME/walkcap/overpass");
    app.add_flag("--no-cache", a.no_cache, "Always query Overpass, never read or write the cache");

    app.add_flag("--roads-walkable", a.roads_walkable,
                 "Treat roads as walkable, e.g. a street closed for an event. Default: roads are obstacles");
    app.add_flag("--grass-not-walkable", a.grass_not_walkable,
                 "Treat grass areas as obstacles. Default: grass is walkable");
    app.add_flag("--keep-building-inner", a.keep_building_inner,
                 "Keep building courtyards walkable. Default: courtyards are private and removed");

    app.add_option("--area-per-pedestrian", a.area_per_pedestrian,
                   "Ap, square meters needed by one pedestrian to move comfortably");
    app.add_option("--rotation-factor", a.rotation_factor,
                   "Rf, visits per day: usable hours per day divided by the mean visit length (10 h / 4 h)");
    app.add_option("--cf", a.cf,
                   "Corrective factor label=fraction in [0, 1], repeatable. Each one multiplies the physical "
                   "capacity. Default: temperature=0.7945 precipitation=0.8219")
        ->allow_extra_args(false)
        ->take_all();
    app.add_option("--management-capacity", a.management_capacity,
                   "Mc, fraction of the ideal management capacity the destination has, in [0, 1]");

    app.add_option("--out", a.out, "Write the walkable area as a GeoJSON FeatureCollection here");
    app.add_option("--report", a.report, "Write the capacity report (inputs, PCC, RCC, ECC) as JSON here");
    app.add_option("--threads", a.threads, "Worker threads for the geometry work, 0 uses every core");
    app.add_flag("--progress", a.progress, "Draw a progress bar on stderr");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return usage;
    }

    try {
        return execute(a, out, err);
    } catch (const Failure& f) {
        err << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
}

}  // namespace walkcap::cli
