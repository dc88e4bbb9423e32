#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace compatient::cli {

inline constexpr const char* kDisclaimer =
    "This software is a research simulator. It has not been validated and should not be used for clinical "
    "purposes.";

/// Entry point of the `compatient` tool. args[0] is the program name.
/// Exit codes: 0 success, 1 numerical failure, 2 configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace compatient::cli
