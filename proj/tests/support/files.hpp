#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace walkcap::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(WALKCAP_FIXTURES) / name;
}

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(WALKCAP_DATA) / name; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string read_fixture(const std::string& name) { return read_file(fixture_path(name)); }

}  // namespace walkcap::testing
