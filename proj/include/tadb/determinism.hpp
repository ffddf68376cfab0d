#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tadb/machine.hpp"
#include "tadb/scheduler.hpp"

namespace tadb {

struct RunSummary {
  std::uint64_t seed = 0;
  // FNV-1a over the exported trace, final globals and the output stream.
  std::uint64_t hash = 0;
  // Last value the program printed, if any.
  std::optional<Word> signature;
  RunStop::Kind end = RunStop::Kind::ProgramExit;
  std::size_t events = 0;
};

// Runs a fresh machine until the program exits or deadlocks. Traps end the
// trapped thread only, so the run carries on past them.
RunSummary run_to_completion(std::string_view program_text, std::string_view model_text, SchedulerMode mode);

struct DeterminismReport {
  std::vector<RunSummary> runs;
  std::size_t distinct_hashes = 0;
  std::size_t distinct_signatures = 0;
  double seconds = 0;
};

// Deterministic mode runs the same configuration `runs` times. Random mode
// uses seeds mode.seed, mode.seed + 1, ... one per run.
DeterminismReport check_determinism(std::string_view program_text, std::string_view model_text, int runs,
                                    SchedulerMode mode);

std::string format_report(const DeterminismReport& report, SchedulerMode mode);

}  // namespace tadb
