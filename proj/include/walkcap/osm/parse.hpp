#pragma once

#include "walkcap/osm/element.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace walkcap::osm {

/// Syntax errors carry the byte offset where the parser stopped.
class OsmParseError : public std::runtime_error {
public:
    explicit OsmParseError(const std::string& message) : std::runtime_error(message) {}
    OsmParseError(const std::string& message, std::size_t byte_offset)
        : std::runtime_error(message + " (at byte " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}

    std::optional<std::size_t> byte_offset() const noexcept { return offset_; }

private:
    std::optional<std::size_t> offset_;
};

/// Overpass interpreter JSON ("out body", "out geom" and "out meta" variants).
/// Entries of unknown type are ignored; nodes, ways and relations must carry an id.
std::vector<OsmElement> parse_overpass_json(std::string_view bytes);

/// OSM XML as produced by the website export, the API and Overpass.
/// Elements marked visible="false" are dropped.
std::vector<OsmElement> parse_osm_xml(std::string_view bytes);

/// Dispatches on the first non-blank byte: '<' means XML, anything else JSON.
std::vector<OsmElement> parse_osm(std::string_view bytes);

}  // namespace walkcap::osm
