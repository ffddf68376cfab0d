#include "tadb/machine.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "tadb/error.hpp"

namespace tadb {

namespace {

Word wrap_add(Word a, Word b) {
  return static_cast<Word>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
Word wrap_sub(Word a, Word b) {
  return static_cast<Word>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
Word wrap_mul(Word a, Word b) {
  return static_cast<Word>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

}  // namespace

std::string_view to_string(ThreadStatus status) {
  switch (status) {
    case ThreadStatus::Runnable:
      return "Runnable";
    case ThreadStatus::ParkedAtSync:
      return "ParkedAtSync";
    case ThreadStatus::StoppedAtBreakpoint:
      return "StoppedAtBreakpoint";
    case ThreadStatus::BlockedOnLock:
      return "BlockedOnLock";
    case ThreadStatus::BlockedOnJoin:
      return "BlockedOnJoin";
    case ThreadStatus::Finished:
      return "Finished";
    case ThreadStatus::Trapped:
      return "Trapped";
  }
  return "?";
}

std::string_view to_string(TrapReason reason) {
  switch (reason) {
    case TrapReason::DivByZero:
      return "div-by-zero";
    case TrapReason::GlobalOutOfBounds:
      return "global-out-of-bounds";
    case TrapReason::InvalidLock:
      return "invalid-lock";
    case TrapReason::UnknownJoinTarget:
      return "unknown-join-target";
    case TrapReason::SelfJoin:
      return "self-join";
    case TrapReason::UnlockNotHeld:
      return "unlock-not-held";
    case TrapReason::SegmentLimit:
      return "segment-limit";
    case TrapReason::PcOutOfRange:
      return "pc-out-of-range";
  }
  return "?";
}

std::string_view to_string(SyncKind kind) {
  switch (kind) {
    case SyncKind::LoadGlobal:
      return "LoadGlobal";
    case SyncKind::StoreGlobal:
      return "StoreGlobal";
    case SyncKind::LockAcq:
      return "LockAcq";
    case SyncKind::LockRel:
      return "LockRel";
    case SyncKind::Spawn:
      return "Spawn";
    case SyncKind::Join:
      return "Join";
    case SyncKind::ThreadExit:
      return "ThreadExit";
  }
  return "?";
}

SyncKind sync_kind_of(Opcode op) {
  switch (op) {
    case Opcode::Ldg:
      return SyncKind::LoadGlobal;
    case Opcode::Stg:
      return SyncKind::StoreGlobal;
    case Opcode::Lock:
      return SyncKind::LockAcq;
    case Opcode::Unlock:
      return SyncKind::LockRel;
    case Opcode::Spawn:
      return SyncKind::Spawn;
    case Opcode::Join:
      return SyncKind::Join;
    default:
      return SyncKind::ThreadExit;
  }
}

Machine::Machine(std::shared_ptr<const Program> program, std::shared_ptr<const TimingModel> model)
    : program_(std::move(program)), model_(std::move(model)) {
  globals_.assign(static_cast<std::size_t>(program_->globals_size), 0);
  locks_.resize(static_cast<std::size_t>(program_->locks_count));
  for (const auto& entry : program_->initial_threads) {
    ThreadState t;
    t.tid = next_tid();
    t.pc = program_->entry_of(entry);
    threads_.push_back(t);
  }
}

const ThreadState& Machine::thread(Tid tid) const {
  if (tid >= threads_.size()) throw Error("out-of-range", "no thread " + std::to_string(tid));
  return threads_[tid];
}

ThreadState& Machine::mut(Tid tid) { return const_cast<ThreadState&>(thread(tid)); }

StepOutcome Machine::trap(ThreadState& t, TrapReason reason) {
  t.status = ThreadStatus::Trapped;
  t.trap = reason;
  t.waiting_on = -1;
  StepOutcome out;
  out.kind = StepOutcome::Kind::Trapped;
  out.trap = reason;
  return out;
}

void Machine::force_trap(Tid tid, TrapReason reason) { trap(mut(tid), reason); }

std::optional<std::size_t> Machine::global_index(const ThreadState& t, const Instruction& ins) const {
  Word index = wrap_add(t.regs[ins.ra], ins.imm);
  if (index < 0 || index >= static_cast<Word>(globals_.size())) return std::nullopt;
  return static_cast<std::size_t>(index);
}

std::int64_t Machine::sync_target(Tid tid) const {
  const auto& t = thread(tid);
  if (t.pc >= program_->instructions.size()) return 0;
  const auto& ins = program_->instructions[t.pc];
  switch (ins.op) {
    case Opcode::Ldg:
    case Opcode::Stg:
      return wrap_add(t.regs[ins.ra], ins.imm);
    case Opcode::Lock:
    case Opcode::Unlock:
      return ins.imm;
    case Opcode::Spawn:
      return ins.target;
    case Opcode::Join:
      return t.regs[ins.ra];
    default:
      return 0;
  }
}

StepOutcome Machine::exec(Tid tid) {
  auto& t = mut(tid);
  if (t.pc >= program_->instructions.size()) return trap(t, TrapReason::PcOutOfRange);
  const auto& ins = program_->instructions[t.pc];

  if (t.status == ThreadStatus::ParkedAtSync) return commit_sync(t, ins);
  if (t.status != ThreadStatus::Runnable)
    throw Error("not-runnable", "thread " + std::to_string(tid) + " is " + std::string(to_string(t.status)));

  if (is_sync_capable(ins.op)) {
    t.status = ThreadStatus::ParkedAtSync;
    StepOutcome out;
    out.kind = StepOutcome::Kind::ArrivedAtSync;
    out.sync = sync_kind_of(ins.op);
    out.target = sync_target(tid);
    return out;
  }
  return exec_local(t, ins);
}

StepOutcome Machine::exec_local(ThreadState& t, const Instruction& ins) {
  auto& r = t.regs;
  std::uint32_t next = t.pc + 1;
  StepOutcome out;
  switch (ins.op) {
    case Opcode::Li:
      r[ins.rd] = ins.imm;
      break;
    case Opcode::Mov:
      r[ins.rd] = r[ins.ra];
      break;
    case Opcode::Add:
      r[ins.rd] = wrap_add(r[ins.ra], r[ins.rb]);
      break;
    case Opcode::Sub:
      r[ins.rd] = wrap_sub(r[ins.ra], r[ins.rb]);
      break;
    case Opcode::Mul:
      r[ins.rd] = wrap_mul(r[ins.ra], r[ins.rb]);
      break;
    case Opcode::Div:
    case Opcode::Rem: {
      Word a = r[ins.ra];
      Word b = r[ins.rb];
      if (b == 0) return trap(t, TrapReason::DivByZero);
      bool overflow = a == std::numeric_limits<Word>::min() && b == -1;
      if (ins.op == Opcode::Div)
        r[ins.rd] = overflow ? a : a / b;
      else
        r[ins.rd] = overflow ? 0 : a % b;
      break;
    }
    case Opcode::And:
      r[ins.rd] = r[ins.ra] & r[ins.rb];
      break;
    case Opcode::Or:
      r[ins.rd] = r[ins.ra] | r[ins.rb];
      break;
    case Opcode::Xor:
      r[ins.rd] = r[ins.ra] ^ r[ins.rb];
      break;
    case Opcode::Addi:
      r[ins.rd] = wrap_add(r[ins.ra], ins.imm);
      break;
    case Opcode::Beq:
      if (r[ins.ra] == r[ins.rb]) next = ins.target;
      break;
    case Opcode::Bne:
      if (r[ins.ra] != r[ins.rb]) next = ins.target;
      break;
    case Opcode::Blt:
      if (r[ins.ra] < r[ins.rb]) next = ins.target;
      break;
    case Opcode::Jmp:
      next = ins.target;
      break;
    case Opcode::Print:
      output_.push_back({t.tid, r[ins.ra], t.clock});
      break;
    case Opcode::Halt:
      t.clock += model_->cost(ins.op);
      t.status = ThreadStatus::Finished;
      out.kind = StepOutcome::Kind::Exited;
      return out;
    default:
      throw Error("internal", "sync instruction routed to local execution");
  }
  t.clock += model_->cost(ins.op);
  t.pc = next;
  return out;
}

StepOutcome Machine::commit_sync(ThreadState& t, const Instruction& ins) {
  StepOutcome out;
  out.kind = StepOutcome::Kind::Committed;
  out.sync = sync_kind_of(ins.op);
  out.target = sync_target(t.tid);
  t.status = ThreadStatus::Runnable;
  Cycles cost = model_->cost(ins.op);

  switch (ins.op) {
    case Opcode::Ldg:
    case Opcode::Stg: {
      auto index = global_index(t, ins);
      if (!index) return trap(t, TrapReason::GlobalOutOfBounds);
      if (ins.op == Opcode::Ldg)
        t.regs[ins.rd] = globals_[*index];
      else
        globals_[*index] = t.regs[ins.rd];
      break;
    }
    case Opcode::Lock: {
      if (ins.imm >= static_cast<std::int64_t>(locks_.size())) return trap(t, TrapReason::InvalidLock);
      auto& lock = locks_[static_cast<std::size_t>(ins.imm)];
      if (lock.held_by) {
        t.status = ThreadStatus::BlockedOnLock;
        t.waiting_on = ins.imm;
        out.kind = StepOutcome::Kind::Blocked;
        return out;
      }
      lock.held_by = t.tid;
      break;
    }
    case Opcode::Unlock: {
      if (ins.imm >= static_cast<std::int64_t>(locks_.size())) return trap(t, TrapReason::InvalidLock);
      auto& lock = locks_[static_cast<std::size_t>(ins.imm)];
      if (lock.held_by != t.tid) return trap(t, TrapReason::UnlockNotHeld);
      lock.held_by.reset();
      t.clock += cost;
      t.pc += 1;
      lock.release_time = t.clock;
      for (auto& waiter : threads_) {
        if (waiter.status == ThreadStatus::BlockedOnLock && waiter.waiting_on == ins.imm) {
          waiter.clock = std::max(waiter.clock, lock.release_time);
          waiter.status = ThreadStatus::Runnable;
          waiter.waiting_on = -1;
        }
      }
      return out;
    }
    case Opcode::Spawn: {
      Tid child_tid = next_tid();
      t.clock += cost;
      t.pc += 1;
      t.regs[ins.rd] = static_cast<Word>(child_tid);
      ThreadState child;
      child.tid = child_tid;
      child.pc = ins.target;
      child.regs = t.regs;
      child.clock = t.clock;
      threads_.push_back(child);  // invalidates `t`
      return out;
    }
    case Opcode::Join: {
      Word target = t.regs[ins.ra];
      if (target < 0 || target >= static_cast<Word>(threads_.size())) return trap(t, TrapReason::UnknownJoinTarget);
      if (target == static_cast<Word>(t.tid)) return trap(t, TrapReason::SelfJoin);
      const auto& joined = threads_[static_cast<std::size_t>(target)];
      if (!(joined.terminated() && joined.exit_committed)) {
        t.status = ThreadStatus::BlockedOnJoin;
        t.waiting_on = target;
        out.kind = StepOutcome::Kind::Blocked;
        return out;
      }
      t.clock = std::max(t.clock, joined.clock);
      break;
    }
    default:
      throw Error("internal", "local instruction routed to sync commit");
  }
  t.clock += cost;
  t.pc += 1;
  return out;
}

void Machine::commit_exit(Tid tid) {
  auto& t = mut(tid);
  if (!t.terminated() || t.exit_committed) throw Error("internal", "thread has no pending exit");
  t.exit_committed = true;
  for (auto& waiter : threads_) {
    if (waiter.status == ThreadStatus::BlockedOnJoin && waiter.waiting_on == static_cast<std::int64_t>(tid)) {
      waiter.clock = std::max(waiter.clock, t.clock);
      waiter.status = ThreadStatus::Runnable;
      waiter.waiting_on = -1;
    }
  }
}

void Machine::stop_at_breakpoint(Tid tid) {
  auto& t = mut(tid);
  if (t.status != ThreadStatus::Runnable) throw Error("internal", "only runnable threads stop at breakpoints");
  t.status = ThreadStatus::StoppedAtBreakpoint;
}

void Machine::resume(Tid tid) {
  auto& t = mut(tid);
  if (t.status == ThreadStatus::StoppedAtBreakpoint) t.status = ThreadStatus::Runnable;
}

void Machine::set_clock(Tid tid, Cycles clock) { mut(tid).clock = clock; }

Word Machine::read(const Selector& s) const {
  if (s.kind == SelectorKind::Global) {
    if (s.index < 0 || s.index >= static_cast<std::int64_t>(globals_.size()))
      throw Error("out-of-range", "global index " + std::to_string(s.index) + " out of range");
    return globals_[static_cast<std::size_t>(s.index)];
  }
  const auto& t = thread(s.tid);
  if (s.index < 0 || s.index >= kRegisterCount)
    throw Error("out-of-range", "register r" + std::to_string(s.index) + " out of range");
  return t.regs[static_cast<std::size_t>(s.index)];
}

void Machine::write(const Selector& s, Word value) {
  if (s.kind == SelectorKind::Global) {
    read(s);
    globals_[static_cast<std::size_t>(s.index)] = value;
    return;
  }
  read(s);
  auto& t = mut(s.tid);
  if (t.terminated())
    throw Error("thread-finished", "thread " + std::to_string(s.tid) + " has terminated; registers are read-only");
  t.regs[static_cast<std::size_t>(s.index)] = value;
}

bool Machine::operator==(const Machine& other) const {
  return threads_ == other.threads_ && globals_ == other.globals_ && locks_ == other.locks_ &&
         output_ == other.output_;
}

}  // namespace tadb
