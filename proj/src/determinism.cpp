#include "tadb/determinism.hpp"

#include <chrono>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

#include "tadb/debugger.hpp"
#include "tadb/hash.hpp"

namespace tadb {

RunSummary run_to_completion(std::string_view program_text, std::string_view model_text, SchedulerMode mode) {
  auto program = std::make_shared<Program>(parse_program(program_text));
  std::shared_ptr<const TimingModel> model =
      model_text.find_first_not_of(" \t\r\n") == std::string_view::npos
          ? std::make_shared<TimingModel>(1)
          : std::make_shared<TimingModel>(load_model(model_text));
  Scheduler s(Machine(program, model), mode);
  RunStop stop;
  do {
    stop = s.run_until();
  } while (stop.kind == RunStop::Kind::Trap);

  RunSummary r;
  r.seed = mode.seed;
  r.end = stop.kind;
  r.events = s.trace().events.size();
  Fnv1a h;
  h.update(export_trace(s.trace(), *program));
  for (Word g : s.machine().globals()) h.update_word(static_cast<std::uint64_t>(g));
  for (const auto& o : s.machine().output()) {
    h.update_word(o.tid);
    h.update_word(static_cast<std::uint64_t>(o.value));
  }
  h.update_word(static_cast<std::uint64_t>(stop.kind));
  r.hash = h.digest();
  if (!s.machine().output().empty()) r.signature = s.machine().output().back().value;
  return r;
}

DeterminismReport check_determinism(std::string_view program_text, std::string_view model_text, int runs,
                                    SchedulerMode mode) {
  DeterminismReport report;
  auto start = std::chrono::steady_clock::now();
  std::set<std::uint64_t> hashes;
  std::set<std::optional<Word>> signatures;
  for (int i = 0; i < runs; ++i) {
    SchedulerMode m = mode;
    if (m.kind == SchedulerMode::Kind::Random) m.seed = mode.seed + static_cast<std::uint64_t>(i);
    auto r = run_to_completion(program_text, model_text, m);
    hashes.insert(r.hash);
    signatures.insert(r.signature);
    report.runs.push_back(r);
  }
  report.distinct_hashes = hashes.size();
  report.distinct_signatures = signatures.size();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string format_report(const DeterminismReport& report, SchedulerMode mode) {
  std::ostringstream s;
  s << "runs: " << report.runs.size() << "\n"
    << "mode: " << (mode.kind == SchedulerMode::Kind::Random ? "rand" : "det");
  if (mode.kind == SchedulerMode::Kind::Random) s << " (seeds " << mode.seed << ".." << mode.seed + report.runs.size() - 1 << ")";
  s << "\n";
  if (!report.runs.empty()) {
    const auto& r = report.runs.front();
    s << "sync events per run: " << r.events << "\n";
    s << "first signature: ";
    if (r.signature)
      s << *r.signature;
    else
      s << "(none)";
    s << "\n";
  }
  s << "distinct (signature, trace) outcomes: " << report.distinct_hashes << "\n"
    << "distinct signatures: " << report.distinct_signatures << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", report.seconds);
  s << "elapsed: " << buf << " s\n";
  return s.str();
}

}  // namespace tadb
