#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "gmix/config.hpp"

namespace gmix {

struct RunOutcome {
  std::filesystem::path output_dir;
  /// Named acceptance flags evaluated by the run (also written to summary.json).
  std::map<std::string, bool> flags;
  bool all_pass = true;
};

/// Runs one experiment and writes results.csv, summary.json and plotdata/*.tsv
/// into cfg.output_dir (created if missing). Output files depend only on the
/// configuration: the thread count never changes a byte.
RunOutcome run(const ExperimentConfig& cfg);

}  // namespace gmix
