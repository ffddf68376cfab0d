#include "tadb/scheduler.hpp"

#include <algorithm>
#include <sstream>

#include "tadb/error.hpp"

namespace tadb {

std::string export_trace(const Trace& trace, const Program& program) {
  std::ostringstream out;
  for (const auto& e : trace.events) {
    out << e.seq << '\t' << e.tid << '\t' << e.time << '\t' << to_string(e.kind) << '\t';
    if (e.kind == SyncKind::Spawn)
      out << program.location_name(static_cast<std::uint32_t>(e.target));
    else
      out << e.target;
    out << '\t' << e.pc << '\n';
  }
  return out.str();
}

Tid min_pending(std::span<const PendingSync> pending) {
  if (pending.empty()) throw Error("empty", "no pending sync points");
  auto it = std::min_element(pending.begin(), pending.end(), [](const PendingSync& a, const PendingSync& b) {
    return a.time != b.time ? a.time < b.time : a.tid < b.tid;
  });
  return it->tid;
}

Scheduler::Scheduler(Machine machine, SchedulerMode mode)
    : machine_(std::move(machine)), mode_(mode), rng_(mode.seed) {}

void Scheduler::suppress_breakpoint(Tid tid) {
  if (skip_breakpoint_.size() <= tid) skip_breakpoint_.resize(tid + 1, false);
  skip_breakpoint_[tid] = true;
}

AdvanceResult Scheduler::advance_to_sync(Tid tid) {
  machine_.resume(tid);
  if (machine_.thread(tid).status != ThreadStatus::Runnable)
    throw Error("not-runnable", "thread " + std::to_string(tid) + " is not runnable");
  if (skip_breakpoint_.size() <= tid) skip_breakpoint_.resize(tid + 1, false);

  AdvanceResult result;
  for (std::uint64_t executed = 0;; ++executed) {
    const auto& t = machine_.thread(tid);
    if (!skip_breakpoint_[tid] && breakpoints_) {
      if (auto id = breakpoints_(tid, t.pc)) {
        machine_.stop_at_breakpoint(tid);
        skip_breakpoint_[tid] = true;
        result.kind = AdvanceResult::Kind::BreakpointHit;
        result.breakpoint_id = *id;
        return result;
      }
    }
    skip_breakpoint_[tid] = false;
    if (executed >= segment_limit_) {
      machine_.force_trap(tid, TrapReason::SegmentLimit);
      result.kind = AdvanceResult::Kind::Trapped;
      result.trap = TrapReason::SegmentLimit;
      choice_.reset();
      return result;
    }

    auto out = machine_.exec(tid);
    switch (out.kind) {
      case StepOutcome::Kind::Advanced:
        continue;
      case StepOutcome::Kind::ArrivedAtSync:
        choice_.reset();
        result.kind = AdvanceResult::Kind::Pending;
        result.pending = *pending_of(tid);
        return result;
      case StepOutcome::Kind::Exited:
        choice_.reset();
        result.kind = AdvanceResult::Kind::Exited;
        result.pending = *pending_of(tid);
        return result;
      case StepOutcome::Kind::Trapped:
        choice_.reset();
        result.kind = AdvanceResult::Kind::Trapped;
        result.trap = out.trap;
        return result;
      default:
        throw Error("internal", "unexpected outcome during lookahead");
    }
  }
}

std::optional<RunStop> Scheduler::settle(std::optional<Tid> except) {
  std::optional<RunStop> first;
  for (Tid tid = 0; tid < machine_.threads().size(); ++tid) {
    if (except && *except == tid) continue;
    if (machine_.thread(tid).status != ThreadStatus::Runnable) continue;
    auto r = advance_to_sync(tid);
    if (first) continue;
    if (r.kind == AdvanceResult::Kind::BreakpointHit) {
      first = RunStop{RunStop::Kind::BreakpointHit, tid, r.breakpoint_id, std::nullopt};
    } else if (r.kind == AdvanceResult::Kind::Trapped) {
      first = RunStop{RunStop::Kind::Trap, tid, 0, r.trap};
    }
  }
  return first;
}

std::optional<PendingSync> Scheduler::pending_of(Tid tid) const {
  const auto& t = machine_.thread(tid);
  if (t.status == ThreadStatus::ParkedAtSync) {
    const auto& ins = machine_.program().instructions[t.pc];
    return PendingSync{tid, t.clock, sync_kind_of(ins.op), machine_.sync_target(tid), t.pc};
  }
  if (t.terminated() && !t.exit_committed) {
    return PendingSync{tid, t.clock, SyncKind::ThreadExit, static_cast<std::int64_t>(tid), t.pc};
  }
  return std::nullopt;
}

std::vector<PendingSync> Scheduler::pending() const {
  std::vector<PendingSync> out;
  for (const auto& t : machine_.threads())
    if (auto p = pending_of(t.tid)) out.push_back(*p);
  return out;
}

std::optional<Tid> Scheduler::select() {
  auto set = pending();
  if (set.empty()) return std::nullopt;
  if (mode_.kind == SchedulerMode::Kind::Deterministic) return min_pending(set);
  if (choice_ && pending_of(*choice_)) return choice_;
  // Raw engine output (not a std distribution) keeps picks identical across
  // standard library implementations.
  choice_ = set[static_cast<std::size_t>(rng_() % set.size())].tid;
  return choice_;
}

CommitOutcome Scheduler::commit(Tid tid) {
  auto pending = pending_of(tid);
  if (!pending) throw Error("not-pending", "thread " + std::to_string(tid) + " has no pending sync point");
  choice_.reset();

  CommitOutcome outcome;
  outcome.tid = tid;
  if (pending->kind == SyncKind::ThreadExit) {
    machine_.commit_exit(tid);
    outcome.kind = CommitOutcome::Kind::ExitCommitted;
    return outcome;
  }

  auto out = machine_.exec(tid);
  switch (out.kind) {
    case StepOutcome::Kind::Committed: {
      SyncEvent event{trace_.events.size(), tid, pending->time, out.sync, out.target, pending->pc};
      trace_.events.push_back(event);
      trace_.watermark = std::max(trace_.watermark, event.time);
      outcome.kind = CommitOutcome::Kind::Event;
      outcome.event = event;
      return outcome;
    }
    case StepOutcome::Kind::Blocked:
      outcome.kind = CommitOutcome::Kind::Blocked;
      return outcome;
    case StepOutcome::Kind::Trapped:
      outcome.kind = CommitOutcome::Kind::Trap;
      outcome.trap = out.trap;
      return outcome;
    default:
      throw Error("internal", "unexpected outcome while committing");
  }
}

std::optional<Tid> Scheduler::first_stopped_at_breakpoint() const {
  for (const auto& t : machine_.threads())
    if (t.status == ThreadStatus::StoppedAtBreakpoint) return t.tid;
  return std::nullopt;
}

RunStop Scheduler::no_pending_stop() const {
  for (const auto& t : machine_.threads()) {
    if (!t.terminated()) {
      return RunStop{RunStop::Kind::Deadlock, t.tid, 0, std::nullopt};
    }
  }
  return RunStop{RunStop::Kind::ProgramExit, 0, 0, std::nullopt};
}

CommitOutcome Scheduler::commit_next() {
  CommitOutcome outcome;
  if (auto stop = settle()) {
    outcome.tid = stop->tid;
    if (stop->kind == RunStop::Kind::Trap) {
      outcome.kind = CommitOutcome::Kind::Trap;
      outcome.trap = stop->trap;
    } else {
      outcome.kind = CommitOutcome::Kind::StoppedAtBreakpoint;
      outcome.breakpoint_id = stop->breakpoint_id;
    }
    return outcome;
  }
  if (auto stopped = first_stopped_at_breakpoint()) {
    outcome.kind = CommitOutcome::Kind::StoppedAtBreakpoint;
    outcome.tid = *stopped;
    const auto& t = machine_.thread(*stopped);
    outcome.breakpoint_id = breakpoints_ ? breakpoints_(t.tid, t.pc).value_or(0) : 0;
    return outcome;
  }
  auto next = select();
  if (!next) {
    auto stop = no_pending_stop();
    outcome.kind = stop.kind == RunStop::Kind::Deadlock ? CommitOutcome::Kind::Deadlock
                                                        : CommitOutcome::Kind::ProgramExit;
    outcome.tid = stop.tid;
    return outcome;
  }
  return commit(*next);
}

RunStop Scheduler::run_until(const std::function<bool(const SyncEvent&)>& stop_after) {
  for (;;) {
    auto c = commit_next();
    switch (c.kind) {
      case CommitOutcome::Kind::Event:
        if (stop_after && stop_after(*c.event)) return RunStop{RunStop::Kind::Predicate, c.tid, 0, std::nullopt};
        break;
      case CommitOutcome::Kind::ExitCommitted:
      case CommitOutcome::Kind::Blocked:
        break;
      case CommitOutcome::Kind::Trap:
        return RunStop{RunStop::Kind::Trap, c.tid, 0, c.trap};
      case CommitOutcome::Kind::ProgramExit:
        return RunStop{RunStop::Kind::ProgramExit, 0, 0, std::nullopt};
      case CommitOutcome::Kind::Deadlock:
        return RunStop{RunStop::Kind::Deadlock, c.tid, 0, std::nullopt};
      case CommitOutcome::Kind::StoppedAtBreakpoint:
        return RunStop{RunStop::Kind::BreakpointHit, c.tid, c.breakpoint_id, std::nullopt};
    }
  }
}

}  // namespace tadb
