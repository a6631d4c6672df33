#pragma once

#include "walkcap/geo/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace walkcap::osm {

using ElementId = std::int64_t;

enum class ElementKind { node, way, relation };

std::string_view to_string(ElementKind kind) noexcept;
std::optional<ElementKind> element_kind_from(std::string_view name) noexcept;

/// OSM key/value tags. Keys are non-empty; lookups are exact and case-sensitive.
class TagMap {
public:
    using Storage = std::map<std::string, std::string, std::less<>>;

    TagMap() = default;
    TagMap(std::initializer_list<std::pair<const std::string, std::string>> init);

    /// Empty keys are ignored. A repeated key keeps the last value.
    void set(std::string key, std::string value);

    const std::string* get(std::string_view key) const;
    bool has(std::string_view key) const { return get(key) != nullptr; }
    bool is(std::string_view key, std::string_view value) const {
        const auto* v = get(key);
        return v != nullptr && *v == value;
    }

    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    Storage::const_iterator begin() const noexcept { return entries_.begin(); }
    Storage::const_iterator end() const noexcept { return entries_.end(); }

    friend bool operator==(const TagMap&, const TagMap&) = default;

private:
    Storage entries_;
};

/// Inline coordinates from "out geom" responses. Entries are empty where the
/// server clipped a node away.
using InlineGeometry = std::vector<std::optional<geo::GeoPoint>>;

struct Member {
    ElementKind kind = ElementKind::way;
    ElementId ref = 0;
    std::string role;
    InlineGeometry geometry;

    friend bool operator==(const Member&, const Member&) = default;
};

struct OsmElement {
    ElementId id = 0;
    ElementKind kind = ElementKind::node;
    TagMap tags;
    std::optional<geo::GeoPoint> location;  // nodes
    std::vector<ElementId> node_refs;       // ways, document order
    InlineGeometry geometry;                // ways, optional
    std::vector<Member> members;            // relations

    friend bool operator==(const OsmElement&, const OsmElement&) = default;
};

inline constexpr std::size_t kMinWayNodes = 2;
inline constexpr std::size_t kMaxWayNodes = 2000;

}  // namespace walkcap::osm
