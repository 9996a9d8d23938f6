#pragma once

#include <functional>
#include <ostream>
#include <span>

#include "heteroflow/datagen.hpp"

namespace heteroflow::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitNumerical = 3 };

/// Runs the heteroflow command line. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Synthetic graph-regression target: class counts weighted by (class mod 3) + 1,
/// divided by the node count, doubled when the graph carries a motif.
double synthetic_regression_target(const datagen::SyntheticGraphRecord& r);

/// Calls fn(0..count-1) on at most `jobs` threads. Each job writes only its own
/// slot, so the merged output does not depend on scheduling. The first
/// exception (lowest job index) is rethrown.
void run_jobs(int jobs, int count, const std::function<void(int)>& fn);

}  // namespace heteroflow::cli
