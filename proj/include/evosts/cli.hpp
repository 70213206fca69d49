#pragma once

namespace evosts {

/// Full command-line entry point. Returns the process exit code:
/// 0 success, 1 configuration error, 2 I/O error, 3 numeric failure.
int run_cli(int argc, const char* const* argv);

} // namespace evosts
