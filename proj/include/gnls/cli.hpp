#pragma once

namespace gnls {

// Full command-line interface; returns the process exit code
// (0 success, 1 validation failure, 2 numerical failure).
int run_cli(int argc, char** argv);

}  // namespace gnls
