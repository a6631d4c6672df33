#include "walkcap/osm/classify.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace walkcap::osm {

namespace detail {
extern const char* const kBuiltinClassificationTable;
}

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames{
    "building", "water", "restricted", "railway", "road", "barrier", "tree", "small-monument", "furniture", "grass"};

std::size_t index(GeometryKind k) { return static_cast<std::size_t>(k); }

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw TableError(where + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw TableError(where + " must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

bool contains(const std::vector<std::string>& list, std::string_view value) {
    return std::find(list.begin(), list.end(), value) != list.end();
}

std::optional<double> positive_number(const json& spec, const char* key, const std::string& where) {
    auto it = spec.find(key);
    if (it == spec.end()) return std::nullopt;
    if (!it->is_number() || !(it->get<double>() > 0.0)) throw TableError(where + "." + key + " must be positive");
    return it->get<double>();
}

}  // namespace

std::string_view to_string(Category c) noexcept { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> category_from(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
        if (kCategoryNames[i] == name) return static_cast<Category>(i);
    return std::nullopt;
}

std::string_view to_string(GeometryKind k) noexcept {
    switch (k) {
        case GeometryKind::point: return "point";
        case GeometryKind::polyline: return "polyline";
        case GeometryKind::polygon: return "polygon";
    }
    return "unknown";
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::irrelevant: return "irrelevant";
        case Verdict::obstacle: return "obstacle";
        case Verdict::walkable_override: return "walkable-override";
    }
    return "unknown";
}

bool ClassificationTable::Rule::matches(const TagMap& tags) const {
    const std::string* value = tags.get(key);
    if (value == nullptr) return false;
    if (contains(except, *value)) return false;
    if (!any_value && !contains(values, *value)) return false;
    for (const auto& [k, vs] : unless) {
        if (const std::string* v = tags.get(k); v != nullptr && contains(vs, *v)) return false;
    }
    return true;
}

ClassificationTable ClassificationTable::from_json(const json& doc) {
    if (!doc.is_object()) throw TableError("classification table must be a JSON object");
    if (doc.value("schema", "") != "walkcap-classification") throw TableError("unknown table schema");
    ClassificationTable table;
    if (!doc.contains("version") || !doc["version"].is_number_integer()) throw TableError("table version missing");
    table.version_ = doc["version"].get<int>();

    for (const auto& name : string_list(doc.value("precedence", json()), "precedence")) {
        auto c = category_from(name);
        if (!c) throw TableError("unknown category in precedence: " + name);
        if (std::find(table.precedence_.begin(), table.precedence_.end(), *c) != table.precedence_.end())
            throw TableError("category listed twice in precedence: " + name);
        table.precedence_.push_back(*c);
    }

    const json& categories = doc.value("categories", json::object());
    if (!categories.is_object()) throw TableError("categories must be an object");
    for (const auto& [name, spec] : categories.items()) {
        auto c = category_from(name);
        if (!c) throw TableError("unknown category: " + name);
        const std::string where = "categories." + name;
        CategorySpec& out = table.specs_[static_cast<std::size_t>(*c)];
        for (const auto& g : string_list(spec.value("geometry", json::array()), where + ".geometry")) {
            if (g == "point") out.geometry[index(GeometryKind::point)] = true;
            else if (g == "polyline") out.geometry[index(GeometryKind::polyline)] = true;
            else if (g == "polygon") out.geometry[index(GeometryKind::polygon)] = true;
            else throw TableError(where + ".geometry: unknown kind " + g);
        }
        const json& rules = spec.value("match", json::array());
        if (!rules.is_array() || rules.empty()) throw TableError(where + ".match must be a non-empty array");
        for (const auto& r : rules) {
            Rule rule;
            rule.key = r.value("key", "");
            if (rule.key.empty()) throw TableError(where + ": rule without key");
            const json& values = r.value("values", json("*"));
            if (values.is_string() && values.get<std::string>() == "*") rule.any_value = true;
            else rule.values = string_list(values, where + ".values");
            if (r.contains("except")) rule.except = string_list(r["except"], where + ".except");
            if (r.contains("unless")) {
                for (const auto& [k, vs] : r["unless"].items()) rule.unless[k] = string_list(vs, where + ".unless");
            }
            out.rules.push_back(std::move(rule));
        }
        out.size = positive_number(spec, "size", where);
        out.lane_width = positive_number(spec, "lane_width", where);
        out.class_key = spec.value("class_key", "");
        if (spec.contains("class_sizes")) {
            for (const auto& [cls, w] : spec["class_sizes"].items()) {
                if (!w.is_number() || !(w.get<double>() > 0.0))
                    throw TableError(where + ".class_sizes." + cls + " must be positive");
                out.class_sizes.emplace(cls, w.get<double>());
            }
        }
        const bool buffered = out.geometry[index(GeometryKind::point)] || out.geometry[index(GeometryKind::polyline)];
        if (buffered && !out.size) throw TableError(where + " admits points or lines but has no size");
        if (std::find(table.precedence_.begin(), table.precedence_.end(), *c) == table.precedence_.end())
            throw TableError(where + " missing from precedence");
    }
    return table;
}

ClassificationTable ClassificationTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TableError("cannot open classification table " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw TableError("classification table " + path.string() + ": " + e.what());
    }
}

const ClassificationTable& ClassificationTable::builtin() {
    static const ClassificationTable table = from_json(json::parse(detail::kBuiltinClassificationTable));
    return table;
}

std::optional<Category> ClassificationTable::match(const TagMap& tags, GeometryKind kind) const {
    for (Category c : precedence_) {
        const CategorySpec& s = spec(c);
        if (!s.geometry[index(kind)]) continue;
        for (const auto& rule : s.rules)
            if (rule.matches(tags)) return c;
    }
    return std::nullopt;
}

std::optional<double> parse_width_meters(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr == text.data()) return std::nullopt;
    std::string_view rest = trim(text.substr(static_cast<std::size_t>(ptr - text.data())));
    if (!rest.empty() && rest != "m") return std::nullopt;
    if (!std::isfinite(value) || value <= 0.0) return std::nullopt;
    return value;
}

double default_buffer_radius(Category category, const TagMap& tags, GeometryKind kind, const ClassificationTable& table) {
    const auto& spec = table.spec(category);
    if (!spec.size) throw std::invalid_argument("category " + std::string(to_string(category)) + " has no buffer size");
    if (kind == GeometryKind::polygon) return 0.0;

    double size = *spec.size;
    bool resolved = false;
    if (category == Category::road) {
        if (const auto* w = tags.get("width")) {
            if (auto width = parse_width_meters(*w)) {
                size = *width;
                resolved = true;
            }
        }
        if (!resolved && spec.lane_width) {
            if (const auto* l = tags.get("lanes")) {
                int lanes = 0;
                auto [ptr, ec] = std::from_chars(l->data(), l->data() + l->size(), lanes);
                if (ec == std::errc{} && ptr == l->data() + l->size() && lanes > 0) {
                    size = lanes * *spec.lane_width;
                    resolved = true;
                }
            }
        }
    }
    if (!resolved && !spec.class_key.empty()) {
        if (const auto* cls = tags.get(spec.class_key)) {
            std::string_view name = *cls;
            if (name.ends_with("_link")) name.remove_suffix(5);
            if (auto it = spec.class_sizes.find(name); it != spec.class_sizes.end()) size = it->second;
        }
    }
    return kind == GeometryKind::polyline ? size / 2.0 : size;
}

double max_default_buffer_radius(const ClassificationTable& table) {
    double best = 0.0;
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        const auto& spec = table.spec(static_cast<Category>(i));
        if (!spec.size) continue;
        double size = *spec.size;
        for (const auto& [cls, w] : spec.class_sizes) size = std::max(size, w);
        if (spec.geometry[index(GeometryKind::point)]) best = std::max(best, size);
        if (spec.geometry[index(GeometryKind::polyline)]) best = std::max(best, size / 2.0);
    }
    return best;
}

ObstacleClassification classify(const TagMap& tags, GeometryKind kind, const ComputeOptions& options,
                                const ClassificationTable& table) {
    const auto category = table.match(tags, kind);
    if (!category) return {};
    if (*category == Category::road && options.roads_walkable) return {Verdict::walkable_override, 0.0, category};
    if (*category == Category::grass && !options.grass_not_walkable) return {};
    if (kind == GeometryKind::polygon) return {Verdict::obstacle, 0.0, category};
    const double radius = default_buffer_radius(*category, tags, kind, table);
    return {Verdict::obstacle, radius, category};
}

}  // namespace walkcap::osm
