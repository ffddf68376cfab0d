#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tadb/machine.hpp"

namespace tadb {

// A thread waiting at its next sync point, tagged with its annotated time.
struct PendingSync {
  Tid tid = 0;
  Cycles time = 0;
  SyncKind kind = SyncKind::LoadGlobal;
  std::int64_t target = 0;
  std::uint32_t pc = 0;
  bool operator==(const PendingSync&) const = default;
};

struct SyncEvent {
  std::uint64_t seq = 0;
  Tid tid = 0;
  Cycles time = 0;
  SyncKind kind = SyncKind::LoadGlobal;
  std::int64_t target = 0;
  std::uint32_t pc = 0;
  bool operator==(const SyncEvent&) const = default;
};

struct Trace {
  std::vector<SyncEvent> events;
  Cycles watermark = 0;
  bool operator==(const Trace&) const = default;
};

// One line per event: seq, tid, time, kind, addr, pc separated by tabs.
std::string export_trace(const Trace& trace, const Program& program);

struct SchedulerMode {
  enum class Kind { Deterministic, Random };
  Kind kind = Kind::Deterministic;
  std::uint64_t seed = 0;

  static SchedulerMode deterministic() { return {}; }
  static SchedulerMode random(std::uint64_t seed) { return {Kind::Random, seed}; }
  bool operator==(const SchedulerMode&) const = default;
};

// Smallest annotated time, ties to the smallest tid. Throws on an empty set.
Tid min_pending(std::span<const PendingSync> pending);

struct AdvanceResult {
  enum class Kind { Pending, BreakpointHit, Exited, Trapped };
  Kind kind = Kind::Pending;
  PendingSync pending;  // valid for Pending and Exited (a ThreadExit)
  int breakpoint_id = 0;
  std::optional<TrapReason> trap;
};

struct RunStop {
  enum class Kind { ProgramExit, Deadlock, BreakpointHit, Trap, Predicate };
  Kind kind = Kind::ProgramExit;
  Tid tid = 0;
  int breakpoint_id = 0;
  std::optional<TrapReason> trap;
};

struct CommitOutcome {
  enum class Kind {
    Event,        // a sync instruction executed and was appended to the trace
    ExitCommitted,
    Blocked,      // lock/join could not complete; the thread now waits
    Trap,
    ProgramExit,
    Deadlock,
    StoppedAtBreakpoint,
  };
  Kind kind = Kind::Event;
  Tid tid = 0;
  std::optional<SyncEvent> event;
  int breakpoint_id = 0;
  std::optional<TrapReason> trap;
};

// Returns the id of an enabled breakpoint at (tid, pc), if any.
using BreakpointQuery = std::function<std::optional<int>(Tid, std::uint32_t)>;

// Collaborative synchronization: every thread runs ahead to its next sync
// point and parks; the scheduler commits the pending sync with the smallest
// annotated time (Deterministic) or a seeded pick (Random).
class Scheduler {
 public:
  static constexpr std::uint64_t kDefaultSegmentLimit = 50'000'000;

  Scheduler(Machine machine, SchedulerMode mode);

  Machine& machine() { return machine_; }
  const Machine& machine() const { return machine_; }
  const Trace& trace() const { return trace_; }
  SchedulerMode mode() const { return mode_; }

  void set_breakpoint_query(BreakpointQuery query) { breakpoints_ = std::move(query); }
  void set_segment_limit(std::uint64_t limit) { segment_limit_ = limit; }

  // Runs the thread's local instructions until it arrives at a sync point,
  // stops before an enabled breakpoint, halts, or traps.
  AdvanceResult advance_to_sync(Tid tid);

  // Advances every Runnable thread in tid order except `except`. Returns the
  // first breakpoint hit or trap encountered; all threads are advanced anyway.
  std::optional<RunStop> settle(std::optional<Tid> except = std::nullopt);

  std::optional<PendingSync> pending_of(Tid tid) const;
  std::vector<PendingSync> pending() const;

  // The thread whose pending sync commits next. Random picks are cached until
  // the pending set changes, so asking twice gives the same answer.
  std::optional<Tid> select();

  // Commits the pending sync (or ThreadExit) of `tid`.
  CommitOutcome commit(Tid tid);

  // Settles, then commits the selected pending sync.
  CommitOutcome commit_next();

  // Loops commit_next until a stop; `stop_after` may end the run after an event.
  RunStop run_until(const std::function<bool(const SyncEvent&)>& stop_after = {});

  // The thread's next instruction executes without re-checking a breakpoint
  // at its current pc (resume-from-breakpoint).
  void suppress_breakpoint(Tid tid);
  // Call after any external change to the pending set (clock overrides).
  void invalidate_choice() { choice_.reset(); }

  // ProgramExit when every thread terminated and exited, Deadlock otherwise.
  RunStop no_pending_stop() const;
  std::optional<Tid> first_stopped_at_breakpoint() const;

 private:
  Machine machine_;
  SchedulerMode mode_;
  Trace trace_;
  std::mt19937_64 rng_;
  std::optional<Tid> choice_;
  BreakpointQuery breakpoints_;
  std::vector<bool> skip_breakpoint_;
  std::uint64_t segment_limit_ = kDefaultSegmentLimit;
};

}  // namespace tadb
