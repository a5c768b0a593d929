#pragma once

namespace spsd::cli {

/// 0 ok, 2 config/validation, 3 assumption violated, 4 numerical failure,
/// 5 repro --check threshold missed.
int run_command(int argc, char** argv);

}  // namespace spsd::cli
