#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace walkcap::cli {

enum ExitCode : int {
    ok = 0,
    failure = 1,
    usage = 2,
    data_source = 3,
    geometry = 4,
};

/// Runs the batch tool. `args` starts with the program name, as argv does.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace walkcap::cli
