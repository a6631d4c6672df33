#include "walkcap/osm/element.hpp"

namespace walkcap::osm {

std::string_view to_string(ElementKind kind) noexcept {
    switch (kind) {
        case ElementKind::node: return "node";
        case ElementKind::way: return "way";
        case ElementKind::relation: return "relation";
    }
    return "unknown";
}

std::optional<ElementKind> element_kind_from(std::string_view name) noexcept {
    if (name == "node") return ElementKind::node;
    if (name == "way") return ElementKind::way;
    if (name == "relation") return ElementKind::relation;
    return std::nullopt;
}

TagMap::TagMap(std::initializer_list<std::pair<const std::string, std::string>> init) {
    for (const auto& [k, v] : init) set(k, v);
}

void TagMap::set(std::string key, std::string value) {
    if (key.empty()) return;
    entries_.insert_or_assign(std::move(key), std::move(value));
}

const std::string* TagMap::get(std::string_view key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace walkcap::osm
