#include "tadb/debugger.hpp"

#include <algorithm>

#include "tadb/error.hpp"
#include "tadb/hash.hpp"

namespace tadb {

std::string_view to_string(StopKind kind) {
  switch (kind) {
    case StopKind::BreakpointHit:
      return "BreakpointHit";
    case StopKind::StepComplete:
      return "StepComplete";
    case StopKind::SyncStepComplete:
      return "SyncStepComplete";
    case StopKind::ProgramExit:
      return "ProgramExit";
    case StopKind::Deadlock:
      return "Deadlock";
    case StopKind::Trap:
      return "Trap";
    case StopKind::Blocked:
      return "Blocked";
  }
  return "?";
}

namespace {

std::shared_ptr<const TimingModel> model_from_text(std::string_view text) {
  // An empty model text means the uniform unit-cost model.
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return std::make_shared<TimingModel>(1);
  return std::make_shared<TimingModel>(load_model(text));
}

Action action_of(Action::Kind kind) {
  Action a;
  a.kind = kind;
  return a;
}

}  // namespace

Debugger::Debugger(std::string program_text, std::string model_text, SchedulerMode mode)
    : program_(std::make_shared<Program>(parse_program(program_text))),
      model_(model_from_text(model_text)),
      mode_(mode) {
  log_.program_hash = fnv1a(program_text);
  log_.model_hash = fnv1a(model_text);
  log_.mode = mode;
  rebuild();
}

void Debugger::rebuild() {
  scheduler_ = std::make_unique<Scheduler>(Machine(program_, model_), mode_);
  scheduler_->set_breakpoint_query([this](Tid tid, std::uint32_t pc) { return breakpoint_at(tid, pc); });
  focus_ = 0;
}

void Debugger::record(Action action) { log_.actions.push_back(std::move(action)); }

std::optional<int> Debugger::breakpoint_at(Tid tid, std::uint32_t pc) const {
  for (const auto& bp : breakpoints_) {
    if (bp.enabled && bp.location == pc && (!bp.thread_filter || *bp.thread_filter == tid)) return bp.id;
  }
  return std::nullopt;
}

const Breakpoint& Debugger::add_breakpoint(std::string_view location, std::optional<Tid> thread_filter) {
  auto index = program_->resolve_location(location);
  if (!index) throw Error("unresolvable-location", "cannot resolve breakpoint location \"" + std::string(location) + "\"");
  Action a;
  a.kind = Action::Kind::BreakAdd;
  a.location = std::string(location);
  a.tid = thread_filter;
  record(a);
  breakpoints_.push_back(Breakpoint{next_breakpoint_id_++, *index, std::string(location), true, thread_filter});
  return breakpoints_.back();
}

void Debugger::remove_breakpoint(int id) {
  // Ids are never reused, so deleting an already deleted id is a no-op.
  if (id < 1 || id >= next_breakpoint_id_) throw Error("unknown-breakpoint", "no breakpoint " + std::to_string(id));
  Action a;
  a.kind = Action::Kind::BreakDel;
  a.id = id;
  record(a);
  std::erase_if(breakpoints_, [id](const Breakpoint& bp) { return bp.id == id; });
}

bool Debugger::exited() const {
  const auto& m = scheduler_->machine();
  return std::all_of(m.threads().begin(), m.threads().end(),
                     [](const ThreadState& t) { return t.terminated() && t.exit_committed; });
}

std::vector<ThreadSnapshot> Debugger::snapshot() const {
  std::vector<ThreadSnapshot> out;
  for (const auto& t : scheduler_->machine().threads())
    out.push_back(ThreadSnapshot{t.tid, t.status, t.pc, t.clock, scheduler_->pending_of(t.tid)});
  return out;
}

void Debugger::ensure_live_focus() {
  const auto& threads = scheduler_->machine().threads();
  if (focus_ < threads.size() && !threads[focus_].terminated()) return;
  for (const auto& t : threads) {
    if (!t.terminated()) {
      focus_ = t.tid;
      return;
    }
  }
}

StopReason Debugger::make_stop(StopKind kind, Tid tid, bool switched) {
  if (kind != StopKind::ProgramExit) ensure_live_focus();
  StopReason stop;
  stop.kind = kind;
  stop.tid = tid;
  stop.focus = focus_;
  stop.focus_switched = switched;
  stop.snapshot = snapshot();
  return stop;
}

StopReason Debugger::from_run_stop(const RunStop& run) {
  switch (run.kind) {
    case RunStop::Kind::BreakpointHit: {
      bool switched = focus_ != run.tid;
      focus_ = run.tid;
      auto stop = make_stop(StopKind::BreakpointHit, run.tid, switched);
      stop.breakpoint_id = run.breakpoint_id;
      return stop;
    }
    case RunStop::Kind::Trap: {
      auto stop = make_stop(StopKind::Trap, run.tid);
      stop.trap = run.trap;
      return stop;
    }
    case RunStop::Kind::Deadlock:
      focus_ = run.tid;
      return make_stop(StopKind::Deadlock, run.tid);
    case RunStop::Kind::ProgramExit:
    case RunStop::Kind::Predicate:
      break;
  }
  return make_stop(StopKind::ProgramExit, focus_);
}

void Debugger::arrive_if_at_sync(Tid tid) {
  auto& m = scheduler_->machine();
  const auto& t = m.thread(tid);
  if (t.status != ThreadStatus::Runnable || t.pc >= program_->instructions.size()) return;
  if (!is_sync_capable(program_->instructions[t.pc].op)) return;
  m.exec(tid);
  scheduler_->invalidate_choice();
}

std::optional<Tid> Debugger::other_stopped_thread() const {
  for (const auto& t : scheduler_->machine().threads())
    if (t.tid != focus_ && t.status == ThreadStatus::StoppedAtBreakpoint) return t.tid;
  return std::nullopt;
}

// Threads woken by an exit (joiners) are run up to their next sync point,
// except the focus, which the caller handles.
std::optional<RunStop> Debugger::commit_leading_exits() {
  for (;;) {
    auto sel = scheduler_->select();
    if (!sel || scheduler_->pending_of(*sel)->kind != SyncKind::ThreadExit) return std::nullopt;
    scheduler_->commit(*sel);
    if (auto stop = scheduler_->settle(focus_)) return stop;
    if (scheduler_->machine().thread(focus_).status == ThreadStatus::Runnable) return std::nullopt;
  }
}

void Debugger::refocus_on_selected() {
  if (other_stopped_thread()) return;
  auto sel = scheduler_->select();
  if (sel && scheduler_->machine().thread(*sel).status == ThreadStatus::ParkedAtSync) focus_ = *sel;
}

StopReason Debugger::cont() {
  record(action_of(Action::Kind::Continue));
  if (exited()) return make_stop(StopKind::ProgramExit, focus_);
  scheduler_->machine().resume(focus_);
  return from_run_stop(scheduler_->run_until());
}

StopReason Debugger::step() {
  record(action_of(Action::Kind::Step));
  if (exited()) return make_stop(StopKind::ProgramExit, focus_);
  if (auto stop = scheduler_->settle(focus_)) return from_run_stop(*stop);

  auto& m = scheduler_->machine();
  Tid original = focus_;
  for (;;) {
    const auto& f = m.thread(focus_);
    if (f.status == ThreadStatus::Runnable || f.status == ThreadStatus::StoppedAtBreakpoint) {
      m.resume(focus_);
      bool at_sync = f.pc < program_->instructions.size() && is_sync_capable(program_->instructions[f.pc].op);
      if (!at_sync) {
        auto out = m.exec(focus_);
        scheduler_->suppress_breakpoint(focus_);
        scheduler_->invalidate_choice();
        if (out.kind == StepOutcome::Kind::Trapped) {
          auto stop = make_stop(StopKind::Trap, f.tid);
          stop.trap = out.trap;
          return stop;
        }
        arrive_if_at_sync(focus_);
        return make_stop(StopKind::StepComplete, focus_, focus_ != original);
      }
      arrive_if_at_sync(focus_);
    }

    // Focus is parked, blocked or terminated: it may only commit if its sync
    // is the one the scheduler would commit next.
    if (auto other = other_stopped_thread()) {
      focus_ = *other;
      continue;
    }
    if (auto stop = commit_leading_exits()) return from_run_stop(*stop);
    if (m.thread(focus_).status == ThreadStatus::Runnable) continue;  // woken by a join
    auto sel = scheduler_->select();
    if (!sel) {
      auto stop = from_run_stop(scheduler_->no_pending_stop());
      stop.focus_switched = focus_ != original;
      return stop;
    }
    focus_ = *sel;
    auto c = scheduler_->commit(focus_);
    scheduler_->suppress_breakpoint(focus_);
    if (c.kind == CommitOutcome::Kind::Trap) {
      auto stop = make_stop(StopKind::Trap, c.tid, focus_ != original);
      stop.trap = c.trap;
      return stop;
    }
    arrive_if_at_sync(focus_);
    return make_stop(StopKind::StepComplete, focus_, focus_ != original);
  }
}

StopReason Debugger::sync_step() {
  record(action_of(Action::Kind::SyncStep));
  if (exited()) return make_stop(StopKind::ProgramExit, focus_);
  if (auto stop = scheduler_->settle(focus_)) return from_run_stop(*stop);

  auto& m = scheduler_->machine();
  Tid original = focus_;
  Tid stepped = focus_;
  auto status = m.thread(focus_).status;

  if (status == ThreadStatus::BlockedOnLock || status == ThreadStatus::BlockedOnJoin)
    return make_stop(StopKind::Blocked, focus_);

  if (status == ThreadStatus::ParkedAtSync || m.thread(focus_).terminated()) {
    if (auto other = other_stopped_thread()) {
      focus_ = *other;
      return make_stop(StopKind::SyncStepComplete, focus_, true);
    }
    if (auto stop = commit_leading_exits()) return from_run_stop(*stop);
    auto sel = scheduler_->select();
    if (!sel) return from_run_stop(scheduler_->no_pending_stop());
    if (*sel != focus_) {
      focus_ = *sel;
      return make_stop(StopKind::SyncStepComplete, focus_, true);
    }
    auto c = scheduler_->commit(focus_);
    if (c.kind == CommitOutcome::Kind::Trap) {
      auto stop = make_stop(StopKind::Trap, c.tid);
      stop.trap = c.trap;
      return stop;
    }
    if (c.kind == CommitOutcome::Kind::Blocked) return make_stop(StopKind::Blocked, focus_);
  }

  auto r = scheduler_->advance_to_sync(stepped);
  if (r.kind == AdvanceResult::Kind::BreakpointHit)
    return from_run_stop(RunStop{RunStop::Kind::BreakpointHit, stepped, r.breakpoint_id, std::nullopt});
  if (r.kind == AdvanceResult::Kind::Trapped) return from_run_stop(RunStop{RunStop::Kind::Trap, stepped, 0, r.trap});
  refocus_on_selected();
  return make_stop(StopKind::SyncStepComplete, stepped, focus_ != original);
}

TimeOverride Debugger::set_time(Tid tid, Cycles new_time, std::optional<std::uint32_t> expect_pc) {
  auto& m = scheduler_->machine();
  const auto& t = m.thread(tid);
  bool parked = t.status == ThreadStatus::ParkedAtSync;
  bool about_to_arrive = (t.status == ThreadStatus::Runnable || t.status == ThreadStatus::StoppedAtBreakpoint) &&
                         t.pc < program_->instructions.size() && is_sync_capable(program_->instructions[t.pc].op);
  if (!parked && !about_to_arrive)
    throw Error("not-pending", "thread " + std::to_string(tid) + " is not waiting at a sync point");
  if (expect_pc && *expect_pc != t.pc)
    throw Error("not-pending", "sync point at pc " + std::to_string(*expect_pc) + " is no longer pending");
  if (new_time < scheduler_->trace().watermark)
    throw Error("below-watermark", "time " + std::to_string(new_time) + " is below the committed watermark " +
                                       std::to_string(scheduler_->trace().watermark));

  TimeOverride o{tid, t.pc, t.clock, new_time};
  Action a;
  a.kind = Action::Kind::SetTime;
  a.tid = tid;
  a.time = new_time;
  a.pc = expect_pc;
  record(a);
  if (about_to_arrive) {
    m.resume(tid);
    m.exec(tid);
  }
  m.set_clock(tid, new_time);
  scheduler_->invalidate_choice();
  return o;
}

void Debugger::write(const Selector& selector, Word value) {
  scheduler_->machine().write(selector, value);
  Action a;
  a.kind = selector.kind == SelectorKind::Register ? Action::Kind::WriteReg : Action::Kind::WriteGlob;
  if (selector.kind == SelectorKind::Register) a.tid = selector.tid;
  a.index = selector.index;
  a.value = value;
  record(a);
  scheduler_->invalidate_choice();
}

void Debugger::reset() {
  record(action_of(Action::Kind::Reset));
  rebuild();
}

void Debugger::apply(const Action& a) {
  switch (a.kind) {
    case Action::Kind::BreakAdd:
      add_breakpoint(a.location, a.tid);
      break;
    case Action::Kind::BreakDel:
      remove_breakpoint(a.id);
      break;
    case Action::Kind::Continue:
      cont();
      break;
    case Action::Kind::Step:
      step();
      break;
    case Action::Kind::SyncStep:
      sync_step();
      break;
    case Action::Kind::WriteReg:
      write(Selector::reg(a.tid.value_or(0), a.index), a.value);
      break;
    case Action::Kind::WriteGlob:
      write(Selector::global(a.index), a.value);
      break;
    case Action::Kind::SetTime:
      set_time(a.tid.value_or(0), a.time, a.pc);
      break;
    case Action::Kind::Reset:
      reset();
      break;
  }
}

Trace replay(const SessionLog& log, std::string_view program_text, std::string_view model_text) {
  if (log.program_hash != fnv1a(program_text))
    throw Error("hash-mismatch", "session log was recorded against a different program");
  if (log.model_hash != fnv1a(model_text))
    throw Error("hash-mismatch", "session log was recorded against a different timing model");
  Debugger debugger{std::string(program_text), std::string(model_text), log.mode};
  for (const auto& action : log.actions) debugger.apply(action);
  return debugger.trace();
}

}  // namespace tadb
