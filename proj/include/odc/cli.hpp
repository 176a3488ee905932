#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace odc {

inline constexpr const char* kToolVersion = "1.0.0";

/// Entry point of the experiment tool. Returns 0 on success, 2 on usage
/// errors and 1 on configuration or runtime failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace odc
