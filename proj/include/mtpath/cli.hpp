#pragma once

namespace mtpath {

// Exit codes: 0 success, 1 usage, 2 validation failure, 3 computation error.
int run_cli(int argc, char** argv);

}  // namespace mtpath
