#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "tadb/isa.hpp"
#include "tadb/timing.hpp"

namespace tadb {

using Tid = std::uint32_t;
using Word = std::int64_t;

enum class ThreadStatus {
  Runnable,
  ParkedAtSync,
  StoppedAtBreakpoint,
  BlockedOnLock,
  BlockedOnJoin,
  Finished,
  Trapped,
};

enum class TrapReason {
  DivByZero,
  GlobalOutOfBounds,
  InvalidLock,
  UnknownJoinTarget,
  SelfJoin,
  UnlockNotHeld,
  SegmentLimit,
  PcOutOfRange,
};

enum class SyncKind { LoadGlobal, StoreGlobal, LockAcq, LockRel, Spawn, Join, ThreadExit };

std::string_view to_string(ThreadStatus status);
std::string_view to_string(TrapReason reason);
std::string_view to_string(SyncKind kind);
SyncKind sync_kind_of(Opcode op);

struct ThreadState {
  Tid tid = 0;
  std::uint32_t pc = 0;
  std::array<Word, kRegisterCount> regs{};
  Cycles clock = 0;
  ThreadStatus status = ThreadStatus::Runnable;
  // Lock index for BlockedOnLock, joined tid for BlockedOnJoin.
  std::int64_t waiting_on = -1;
  std::optional<TrapReason> trap;
  // A terminated thread owes one ThreadExit commit; joiners wake on it.
  bool exit_committed = false;

  bool terminated() const { return status == ThreadStatus::Finished || status == ThreadStatus::Trapped; }
  bool operator==(const ThreadState&) const = default;
};

struct LockRecord {
  std::optional<Tid> held_by;
  Cycles release_time = 0;
  bool operator==(const LockRecord&) const = default;
};

struct OutputRecord {
  Tid tid = 0;
  Word value = 0;
  Cycles clock = 0;
  bool operator==(const OutputRecord&) const = default;
};

struct StepOutcome {
  enum class Kind { Advanced, ArrivedAtSync, Committed, Blocked, Exited, Trapped };
  Kind kind = Kind::Advanced;
  SyncKind sync = SyncKind::LoadGlobal;
  std::int64_t target = 0;  // global index / lock index / spawn entry / joined tid
  std::optional<TrapReason> trap;
};

enum class SelectorKind { Register, Global };

struct Selector {
  SelectorKind kind = SelectorKind::Global;
  Tid tid = 0;
  std::int64_t index = 0;  // register number or global word index

  static Selector reg(Tid tid, std::int64_t index) { return {SelectorKind::Register, tid, index}; }
  static Selector global(std::int64_t index) { return {SelectorKind::Global, 0, index}; }
};

// Guest machine: threads, globals and locks. Single logical executor; no
// member may be called concurrently on one instance.
class Machine {
 public:
  Machine(std::shared_ptr<const Program> program, std::shared_ptr<const TimingModel> model);

  const Program& program() const { return *program_; }
  const TimingModel& model() const { return *model_; }

  // Runnable thread: a local instruction executes (Advanced/Exited/Trapped);
  // a sync-capable instruction is NOT executed, the thread parks and
  // ArrivedAtSync reports the annotation (its clock). ParkedAtSync thread:
  // the sync instruction is authorized and executes (Committed/Blocked/Trapped).
  StepOutcome exec(Tid tid);

  // Commits the pending ThreadExit of a terminated thread, waking joiners.
  void commit_exit(Tid tid);

  // Target of the sync instruction at the thread's pc, from current registers.
  std::int64_t sync_target(Tid tid) const;

  void stop_at_breakpoint(Tid tid);
  void resume(Tid tid);
  // Terminates a thread with `reason` (scheduler-imposed limits).
  void force_trap(Tid tid, TrapReason reason);
  // Debugger time override; no monotonicity check here.
  void set_clock(Tid tid, Cycles clock);

  Word read(const Selector& selector) const;
  void write(const Selector& selector, Word value);

  const ThreadState& thread(Tid tid) const;
  const std::vector<ThreadState>& threads() const { return threads_; }
  const std::vector<Word>& globals() const { return globals_; }
  const std::vector<LockRecord>& locks() const { return locks_; }
  const std::vector<OutputRecord>& output() const { return output_; }
  Tid next_tid() const { return static_cast<Tid>(threads_.size()); }

  bool operator==(const Machine& other) const;

 private:
  ThreadState& mut(Tid tid);
  StepOutcome trap(ThreadState& t, TrapReason reason);
  StepOutcome exec_local(ThreadState& t, const Instruction& ins);
  StepOutcome commit_sync(ThreadState& t, const Instruction& ins);
  std::optional<std::size_t> global_index(const ThreadState& t, const Instruction& ins) const;

  std::shared_ptr<const Program> program_;
  std::shared_ptr<const TimingModel> model_;
  std::vector<ThreadState> threads_;
  std::vector<Word> globals_;
  std::vector<LockRecord> locks_;
  std::vector<OutputRecord> output_;
};

}  // namespace tadb
