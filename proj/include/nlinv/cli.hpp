#pragma once

#include <iosfwd>

#include "nlinv/experiments.hpp"

namespace nlinv::cli {

enum ExitCode : int { ok = 0, config_error = 1, numerical_error = 2, property_failure = 3 };

// Executor running jobs on up to `workers` threads; results are keyed by index.
Executor make_pool_executor(int workers);

// Entry point: nlinv <solve|rate-study|effdim|lower-bound|check> [--config PATH] [--out DIR] [--seed N]
// [--workers N] [--verbose].
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlinv::cli
