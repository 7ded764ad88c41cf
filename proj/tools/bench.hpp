#pragma once

#include <string>

#ifndef NPBRAKE_DATA_DIR
#define NPBRAKE_DATA_DIR "data"
#endif

namespace npbrake_cli {

// Runs the acceptance criteria on the scenario pack and prints one row per
// criterion. Returns 0 when all pass, 4 otherwise.
int RunBench(const std::string& data_dir);

}  // namespace npbrake_cli
