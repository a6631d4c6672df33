#pragma once

#include "walkcap/osm/element.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace walkcap::osm {

enum class GeometryKind { point, polyline, polygon };

enum class Category { building, water, restricted, railway, road, barrier, tree, small_monument, furniture, grass };

inline constexpr std::size_t kCategoryCount = 10;

std::string_view to_string(Category c) noexcept;
std::optional<Category> category_from(std::string_view name) noexcept;
std::string_view to_string(GeometryKind k) noexcept;

/// The three calculation switches offered before a run.
struct ComputeOptions {
    /// Fill building courtyards (holes) before subtraction: they are treated
    /// as private. When false the courtyards stay walkable.
    bool remove_building_inner_areas = true;
    /// Road features stop being obstacles (events, closures).
    bool roads_walkable = false;
    /// Grass polygons become obstacles.
    bool grass_not_walkable = false;

    friend bool operator==(const ComputeOptions&, const ComputeOptions&) = default;
};

enum class Verdict { irrelevant, obstacle, walkable_override };

std::string_view to_string(Verdict v) noexcept;

struct ObstacleClassification {
    Verdict verdict = Verdict::irrelevant;
    double buffer_radius = 0.0;        // metres; 0 for polygons
    std::optional<Category> category;  // set for obstacle and override verdicts

    friend bool operator==(const ObstacleClassification&, const ObstacleClassification&) = default;
};

class TableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Versioned tag -> category -> size table (see data/classification-v1.json).
class ClassificationTable {
public:
    struct Rule {
        std::string key;
        bool any_value = false;
        std::vector<std::string> values;
        std::vector<std::string> except;
        std::map<std::string, std::vector<std::string>> unless;

        bool matches(const TagMap& tags) const;
    };

    struct CategorySpec {
        std::vector<Rule> rules;
        std::array<bool, 3> geometry{};  // indexed by GeometryKind
        std::optional<double> size;      // width for lines, radius for points
        std::optional<double> lane_width;
        std::string class_key;
        std::map<std::string, double, std::less<>> class_sizes;
    };

    /// The table compiled into the binary (identical to the shipped data file).
    static const ClassificationTable& builtin();
    static ClassificationTable from_json(const nlohmann::json& doc);
    static ClassificationTable load(const std::filesystem::path& path);

    int version() const noexcept { return version_; }
    const std::vector<Category>& precedence() const noexcept { return precedence_; }
    const CategorySpec& spec(Category c) const { return specs_[static_cast<std::size_t>(c)]; }

    /// Highest-precedence category admitted for this tag set and geometry.
    std::optional<Category> match(const TagMap& tags, GeometryKind kind) const;

private:
    int version_ = 0;
    std::vector<Category> precedence_;
    std::array<CategorySpec, kCategoryCount> specs_{};
};

/// Pure and reentrant.
ObstacleClassification classify(const TagMap& tags, GeometryKind kind, const ComputeOptions& options,
                                const ClassificationTable& table = ClassificationTable::builtin());

/// Buffer radius for a point or centreline obstacle. Roads use an explicit
/// `width` tag when parseable, else `lanes` x lane width, else the class
/// size. Line widths are halved; point sizes are already radii; polygons get 0.
/// Throws std::invalid_argument for categories without a size.
double default_buffer_radius(Category category, const TagMap& tags, GeometryKind kind = GeometryKind::polyline,
                             const ClassificationTable& table = ClassificationTable::builtin());

/// Parses OSM width values such as "8", "8.5 m", "8m". Rejects imperial and free text.
std::optional<double> parse_width_meters(std::string_view text);

/// Largest buffer radius any point or line feature can receive from the table
/// (ignoring explicit width/lanes tags). Used to pad fetch bounding boxes.
double max_default_buffer_radius(const ClassificationTable& table = ClassificationTable::builtin());

}  // namespace walkcap::osm
