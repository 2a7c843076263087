#pragma once

#include <string>
#include <vector>

namespace brw {

/// Full command-line surface; returns the process exit code.
/// 0 success, 1 validation/configuration, 2 numerical non-convergence,
/// 3 acceptance failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace brw
