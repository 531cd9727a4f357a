#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace brdf::cli {

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Exit codes: 0 success, 1 metric/model error, 2 I/O or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace brdf::cli
