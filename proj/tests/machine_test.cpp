#include <gtest/gtest.h>

#include <limits>

#include "tadb/error.hpp"
#include "tadb/machine.hpp"

using namespace tadb;

namespace {

Machine make(std::string_view src, std::string_view model = "default=1") {
  return Machine(std::make_shared<Program>(parse_program(src)), std::make_shared<TimingModel>(load_model(model)));
}

// Runs a thread's local instructions only; stops on anything else.
StepOutcome run_local(Machine& m, Tid tid) {
  for (;;) {
    auto out = m.exec(tid);
    if (out.kind != StepOutcome::Kind::Advanced) return out;
  }
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

}  // namespace

TEST(Machine, InitialState) {
  auto m = make(".globals 8\n.thread a\n.thread b\na: halt\nb: halt\n");
  ASSERT_EQ(m.threads().size(), 2u);
  EXPECT_EQ(m.threads()[0].tid, 0u);
  EXPECT_EQ(m.threads()[1].tid, 1u);
  EXPECT_EQ(m.threads()[1].pc, 1u);
  for (const auto& t : m.threads()) {
    EXPECT_EQ(t.clock, 0u);
    EXPECT_EQ(t.status, ThreadStatus::Runnable);
  }
  EXPECT_EQ(m.globals(), std::vector<Word>(8, 0));

  auto single = make("main: halt\n");
  ASSERT_EQ(single.threads().size(), 1u);
  EXPECT_EQ(single.threads()[0].pc, 0u);
}

TEST(Machine, LiAdvancesClock) {
  auto m = make("main: li r1, 5\n halt\n");
  auto out = m.exec(0);
  EXPECT_EQ(out.kind, StepOutcome::Kind::Advanced);
  EXPECT_EQ(m.thread(0).regs[1], 5);
  EXPECT_EQ(m.thread(0).clock, 1u);
  EXPECT_EQ(m.thread(0).pc, 1u);
}

TEST(Machine, ArrivalAfterHundredLocalInstructions) {
  std::string src = ".globals 1\nmain:\n";
  for (int i = 0; i < 100; ++i) src += "    addi r1, r1, 1\n";
  src += "    ldg r2, [r0+0]\n    halt\n";
  auto m = make(src);
  auto out = run_local(m, 0);
  EXPECT_EQ(out.kind, StepOutcome::Kind::ArrivedAtSync);
  EXPECT_EQ(out.sync, SyncKind::LoadGlobal);
  EXPECT_EQ(m.thread(0).clock, 100u);
  EXPECT_EQ(m.thread(0).status, ThreadStatus::ParkedAtSync);
  EXPECT_EQ(m.thread(0).pc, 100u);  // not executed yet
  auto commit = m.exec(0);
  EXPECT_EQ(commit.kind, StepOutcome::Kind::Committed);
  EXPECT_EQ(m.thread(0).clock, 101u);
  EXPECT_EQ(m.thread(0).status, ThreadStatus::Runnable);
}

TEST(Machine, CostsFollowModel) {
  auto m = make("main: li r1, 3\n mul r2, r1, r1\n div r3, r2, r1\n halt\n", "default=2\nmul=5\ndiv=7\nhalt=3");
  run_local(m, 0);
  EXPECT_EQ(m.thread(0).regs[2], 9);
  EXPECT_EQ(m.thread(0).regs[3], 3);
  EXPECT_EQ(m.thread(0).clock, 2u + 5u + 7u + 3u);
  EXPECT_EQ(m.thread(0).status, ThreadStatus::Finished);
}

TEST(Machine, DivisionByZeroTraps) {
  auto m = make("main: div r1, r2, r0\n halt\n");
  auto out = m.exec(0);
  EXPECT_EQ(out.kind, StepOutcome::Kind::Trapped);
  EXPECT_EQ(out.trap, TrapReason::DivByZero);
  EXPECT_EQ(m.thread(0).status, ThreadStatus::Trapped);
  EXPECT_EQ(m.thread(0).clock, 0u);
  auto rem = make("main: rem r1, r2, r0\n halt\n");
  EXPECT_EQ(rem.exec(0).trap, TrapReason::DivByZero);
}

TEST(Machine, ArithmeticWraps) {
  auto m = make(
      "main: li r1, 9223372036854775807\n addi r2, r1, 1\n li r3, -1\n"
      " sub r4, r2, r3\n div r5, r2, r3\n rem r6, r2, r3\n mul r7, r1, r1\n li r8, -7\n li r9, 2\n"
      " div r10, r8, r9\n rem r11, r8, r9\n halt\n");
  run_local(m, 0);
  const auto& r = m.thread(0).regs;
  constexpr Word kMin = std::numeric_limits<Word>::min();
  EXPECT_EQ(r[2], kMin);
  EXPECT_EQ(r[4], kMin + 1);
  EXPECT_EQ(r[5], kMin);  // INT64_MIN / -1 wraps
  EXPECT_EQ(r[6], 0);
  EXPECT_EQ(r[7], 1);     // (2^63-1)^2 mod 2^64
  EXPECT_EQ(r[10], -3);   // truncating
  EXPECT_EQ(r[11], -1);
}

TEST(Machine, BitwiseAndBranches) {
  auto m = make(
      "main: li r1, 12\n li r2, 10\n and r3, r1, r2\n or r4, r1, r2\n xor r5, r1, r2\n mov r6, r5\n"
      " blt r2, r1, skip\n li r7, 99\nskip: beq r1, r1, eq\n li r8, 99\neq: bne r1, r1, main\n jmp end\n"
      " li r9, 99\nend: halt\n");
  run_local(m, 0);
  const auto& r = m.thread(0).regs;
  EXPECT_EQ(r[3], 8);
  EXPECT_EQ(r[4], 14);
  EXPECT_EQ(r[5], 6);
  EXPECT_EQ(r[6], 6);
  EXPECT_EQ(r[7], 0);
  EXPECT_EQ(r[8], 0);
  EXPECT_EQ(r[9], 0);
  EXPECT_EQ(m.thread(0).clock, 11u);
}

TEST(Machine, PrintRecordsOutput) {
  auto m = make("main: li r1, -4\n print r1\n halt\n");
  run_local(m, 0);
  ASSERT_EQ(m.output().size(), 1u);
  EXPECT_EQ(m.output()[0], (OutputRecord{0, -4, 1}));
}

TEST(Machine, GlobalsLoadStoreAndBounds) {
  auto m = make(".globals 2\nmain: li r1, 7\n stg r1, [r0+0]\n ldg r2, [r0+0]\n li r3, 5\n stg r1, [r3-3]\n halt\n");
  run_local(m, 0);
  m.exec(0);  // commit stg
  EXPECT_EQ(m.read(Selector::global(0)), 7);
  run_local(m, 0);
  m.exec(0);
  EXPECT_EQ(m.thread(0).regs[2], 7);
  auto out = run_local(m, 0);
  EXPECT_EQ(out.target, 2);
  out = m.exec(0);
  EXPECT_EQ(out.kind, StepOutcome::Kind::Trapped);
  EXPECT_EQ(out.trap, TrapReason::GlobalOutOfBounds);
}

TEST(Machine, ReadWriteSelectors) {
  auto m = make(".globals 2\n.thread a\n.thread b\na: halt\nb: halt\n");
  m.write(Selector::reg(1, 3), -2);
  EXPECT_EQ(m.read(Selector::reg(1, 3)), -2);
  m.write(Selector::global(1), 11);
  EXPECT_EQ(m.read(Selector::global(1)), 11);
  EXPECT_EQ(code_of([&] { m.write(Selector::global(2), 1); }), "out-of-range");
  EXPECT_EQ(code_of([&] { m.read(Selector::global(-1)); }), "out-of-range");
  EXPECT_EQ(code_of([&] { m.read(Selector::reg(0, 16)); }), "out-of-range");
  EXPECT_EQ(code_of([&] { m.read(Selector::reg(2, 0)); }), "out-of-range");
  m.exec(0);
  EXPECT_EQ(code_of([&] { m.write(Selector::reg(0, 1), 1); }), "thread-finished");
  EXPECT_EQ(m.read(Selector::reg(0, 1)), 0);
}

TEST(Machine, LocalInstructionTouchesOnlyItsThread) {
  auto m = make(".globals 1\n.thread a\n.thread b\na: li r1, 3\n mul r2, r1, r1\n halt\nb: li r1, 4\n halt\n");
  auto before = m;
  m.exec(0);
  EXPECT_EQ(m.threads()[1], before.threads()[1]);
  EXPECT_EQ(m.globals(), before.globals());
  EXPECT_EQ(m.locks(), before.locks());
}

TEST(Machine, LockBlocksAndReleaseWakesWithMaxClock) {
  auto m = make(".locks 1\n.thread a\n.thread b\na: lock 0\n li r1, 1\n li r1, 2\n unlock 0\n halt\nb: lock 0\n halt\n",
                "default=1\nunlock=4");
  EXPECT_EQ(m.exec(0).kind, StepOutcome::Kind::ArrivedAtSync);
  EXPECT_EQ(m.exec(0).kind, StepOutcome::Kind::Committed);  // a holds lock 0, clock 1
  EXPECT_EQ(m.exec(1).kind, StepOutcome::Kind::ArrivedAtSync);
  auto blocked = m.exec(1);
  EXPECT_EQ(blocked.kind, StepOutcome::Kind::Blocked);
  EXPECT_EQ(m.thread(1).status, ThreadStatus::BlockedOnLock);
  EXPECT_EQ(m.thread(1).waiting_on, 0);
  EXPECT_EQ(m.thread(1).pc, 5u);
  EXPECT_EQ(m.thread(1).clock, 0u);
  run_local(m, 0);  // arrives at unlock with clock 3
  m.exec(0);
  EXPECT_EQ(m.thread(0).clock, 7u);
  EXPECT_EQ(m.locks()[0].release_time, 7u);
  EXPECT_FALSE(m.locks()[0].held_by.has_value());
  EXPECT_EQ(m.thread(1).status, ThreadStatus::Runnable);
  EXPECT_EQ(m.thread(1).clock, 7u);
  EXPECT_EQ(m.exec(1).kind, StepOutcome::Kind::ArrivedAtSync);
  EXPECT_EQ(m.exec(1).kind, StepOutcome::Kind::Committed);
  EXPECT_EQ(m.locks()[0].held_by, std::optional<Tid>(1));
}

TEST(Machine, LockErrors) {
  auto bad = make(".locks 1\nmain: lock 1\n halt\n");
  bad.exec(0);
  EXPECT_EQ(bad.exec(0).trap, TrapReason::InvalidLock);
  auto not_held = make(".locks 1\nmain: unlock 0\n halt\n");
  not_held.exec(0);
  EXPECT_EQ(not_held.exec(0).trap, TrapReason::UnlockNotHeld);
}

TEST(Machine, SpawnCopiesRegistersAndJoinWaitsForExit) {
  auto m = make("main: li r1, 42\n spawn r2, child\n join r2\n halt\nchild: addi r1, r1, 1\n li r3, 1\n halt\n",
                "default=1\nspawn=3");
  run_local(m, 0);
  m.exec(0);  // spawn at clock 1, cost 3
  ASSERT_EQ(m.threads().size(), 2u);
  const auto& child = m.thread(1);
  EXPECT_EQ(child.clock, 4u);
  EXPECT_EQ(child.pc, 4u);
  EXPECT_EQ(child.regs[1], 42);
  EXPECT_EQ(child.regs[2], 1);
  EXPECT_EQ(m.thread(0).regs[2], 1);

  EXPECT_EQ(m.exec(0).kind, StepOutcome::Kind::ArrivedAtSync);
  EXPECT_EQ(m.exec(0).kind, StepOutcome::Kind::Blocked);
  EXPECT_EQ(m.thread(0).status, ThreadStatus::BlockedOnJoin);
  EXPECT_EQ(run_local(m, 1).kind, StepOutcome::Kind::Exited);
  EXPECT_EQ(m.thread(1).clock, 7u);
  EXPECT_EQ(m.thread(0).status, ThreadStatus::BlockedOnJoin);  // exit not committed yet
  m.commit_exit(1);
  EXPECT_EQ(m.thread(0).status, ThreadStatus::Runnable);
  EXPECT_EQ(m.thread(0).clock, 7u);
  m.exec(0);
  EXPECT_EQ(m.exec(0).kind, StepOutcome::Kind::Committed);
  EXPECT_EQ(m.thread(0).clock, 8u);
}

TEST(Machine, JoinErrors) {
  auto unknown = make("main: li r1, 5\n join r1\n halt\n");
  unknown.exec(0);
  unknown.exec(0);
  EXPECT_EQ(unknown.exec(0).trap, TrapReason::UnknownJoinTarget);
  auto self = make("main: join r0\n halt\n");
  self.exec(0);
  EXPECT_EQ(self.exec(0).trap, TrapReason::SelfJoin);
}

TEST(Machine, RunningOffTheEndTraps) {
  auto m = make("main: li r1, 1\n");
  m.exec(0);
  EXPECT_EQ(m.exec(0).trap, TrapReason::PcOutOfRange);
}

TEST(Machine, TrapsAreDeterministic) {
  const char* src = ".globals 1\nmain: li r1, 3\nl: addi r1, r1, -1\n bne r1, r0, l\n div r2, r1, r0\n halt\n";
  auto a = make(src), b = make(src);
  EXPECT_EQ(run_local(a, 0).trap, run_local(b, 0).trap);
  EXPECT_EQ(a.thread(0).pc, b.thread(0).pc);
  EXPECT_EQ(a.thread(0).clock, b.thread(0).clock);
  EXPECT_EQ(a.thread(0).clock, 7u);
}
