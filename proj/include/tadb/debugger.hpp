#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tadb/isa.hpp"
#include "tadb/machine.hpp"
#include "tadb/scheduler.hpp"
#include "tadb/session_log.hpp"
#include "tadb/timing.hpp"

namespace tadb {

struct Breakpoint {
  int id = 0;
  std::uint32_t location = 0;
  std::string spec;  // location as the user wrote it
  bool enabled = true;
  std::optional<Tid> thread_filter;
};

enum class StopKind { BreakpointHit, StepComplete, SyncStepComplete, ProgramExit, Deadlock, Trap, Blocked };

std::string_view to_string(StopKind kind);

struct ThreadSnapshot {
  Tid tid = 0;
  ThreadStatus status = ThreadStatus::Runnable;
  std::uint32_t pc = 0;
  Cycles clock = 0;
  std::optional<PendingSync> pending;
  bool operator==(const ThreadSnapshot&) const = default;
};

struct StopReason {
  StopKind kind = StopKind::ProgramExit;
  Tid tid = 0;  // thread that hit / stepped / trapped / is blocked
  int breakpoint_id = 0;
  std::optional<TrapReason> trap;
  Tid focus = 0;
  bool focus_switched = false;
  std::vector<ThreadSnapshot> snapshot;
  bool operator==(const StopReason&) const = default;
};

struct TimeOverride {
  Tid tid = 0;
  std::uint32_t pc = 0;
  Cycles old_time = 0;
  Cycles new_time = 0;
  std::int64_t delta() const { return static_cast<std::int64_t>(new_time) - static_cast<std::int64_t>(old_time); }
};

// Interactive debugging on top of the deterministic scheduler. Every mutating
// call is appended to the session log so the session can be replayed.
class Debugger {
 public:
  Debugger(std::string program_text, std::string model_text, SchedulerMode mode = SchedulerMode::deterministic());
  Debugger(const Debugger&) = delete;
  Debugger& operator=(const Debugger&) = delete;

  const Breakpoint& add_breakpoint(std::string_view location, std::optional<Tid> thread_filter = std::nullopt);
  void remove_breakpoint(int id);
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

  StopReason cont();
  StopReason step();
  StopReason sync_step();

  // Moves the pending sync of `tid` to `new_time`; the thread's clock shifts by
  // the same delta so all of its later annotations move with it.
  TimeOverride set_time(Tid tid, Cycles new_time, std::optional<std::uint32_t> expect_pc = std::nullopt);

  Word read(const Selector& selector) const { return scheduler_->machine().read(selector); }
  void write(const Selector& selector, Word value);

  // Fresh machine; breakpoints are kept.
  void reset();

  void apply(const Action& action);

  Tid focus() const { return focus_; }
  bool exited() const;
  std::vector<ThreadSnapshot> snapshot() const;
  std::vector<PendingSync> pending() const { return scheduler_->pending(); }
  const Trace& trace() const { return scheduler_->trace(); }
  const Machine& machine() const { return scheduler_->machine(); }
  const Program& program() const { return *program_; }
  const TimingModel& model() const { return *model_; }
  SchedulerMode mode() const { return mode_; }
  const SessionLog& log() const { return log_; }

 private:
  void rebuild();
  void record(Action action);
  std::optional<int> breakpoint_at(Tid tid, std::uint32_t pc) const;
  StopReason make_stop(StopKind kind, Tid tid, bool switched = false);
  StopReason from_run_stop(const RunStop& stop);
  void arrive_if_at_sync(Tid tid);
  std::optional<Tid> other_stopped_thread() const;
  std::optional<RunStop> commit_leading_exits();
  void refocus_on_selected();
  void ensure_live_focus();

  std::shared_ptr<const Program> program_;
  std::shared_ptr<const TimingModel> model_;
  SchedulerMode mode_;
  std::unique_ptr<Scheduler> scheduler_;
  std::vector<Breakpoint> breakpoints_;
  int next_breakpoint_id_ = 1;
  Tid focus_ = 0;
  SessionLog log_;
};

// Re-executes a recorded session against a fresh machine.
Trace replay(const SessionLog& log, std::string_view program_text, std::string_view model_text);

}  // namespace tadb
