#include <gtest/gtest.h>

#include <set>

#include "support/fixtures.hpp"
#include "tadb/corpus.hpp"
#include "tadb/error.hpp"
#include "tadb/isa.hpp"

using namespace tadb;
using tadb::testing::corpus;

namespace {

std::string error_code(std::string_view src) {
  try {
    parse_program(src);
  } catch (const ParseError& e) {
    return e.code() + "@" + std::to_string(e.line()) + ":" + e.token();
  }
  return "ok";
}

}  // namespace

TEST(Parse, MinimalProgram) {
  auto p = parse_program(".globals 1\nmain: halt");
  ASSERT_EQ(p.instructions.size(), 1u);
  EXPECT_EQ(p.instructions[0].op, Opcode::Halt);
  EXPECT_EQ(p.globals_size, 1);
  EXPECT_EQ(p.initial_threads, std::vector<std::string>{"main"});
}

TEST(Parse, UnknownOpcodeReportsLineAndToken) {
  EXPECT_EQ(error_code("main: foo r1"), "syntax@1:foo");
}

TEST(Parse, ErrorCodes) {
  EXPECT_EQ(error_code("main: halt\nmain: halt"), "duplicate-label@2:main");
  EXPECT_EQ(error_code("main: jmp nowhere"), "undefined-label@1:nowhere");
  EXPECT_EQ(error_code("main: li r16, 1"), "bad-register@1:r16");
  EXPECT_EQ(error_code("start: halt"), "missing-entry@0:main");
  EXPECT_EQ(error_code(".thread nope\nmain: halt"), "undefined-label@1:nope");
  EXPECT_EQ(error_code("main: li r1"), "syntax@1:r1");
  EXPECT_EQ(error_code("main: ldg r1, r2"), "syntax@1:r2");
  EXPECT_EQ(error_code(".bogus 3\nmain: halt"), "syntax@1:.bogus");
  EXPECT_EQ(error_code("main: li r1, 12x"), "syntax@1:12x");
}

TEST(Parse, DirectivesCommentsAndLabels) {
  auto p = parse_program(
      "# header comment\n"
      ".globals 3   # trailing\n"
      ".locks 2\n"
      ".thread a\n"
      ".thread b\n"
      "a:\n"
      "b: first: li r1, -7\n"
      "    ldg r2, [r1-4]\n"
      "    stg r2, [r3]\n"
      "    lock 1\n"
      "    unlock 1\n"
      "    halt\n");
  EXPECT_EQ(p.globals_size, 3);
  EXPECT_EQ(p.locks_count, 2);
  EXPECT_EQ(p.initial_threads, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(p.labels.at("a"), 0u);
  EXPECT_EQ(p.labels.at("b"), 0u);
  EXPECT_EQ(p.labels.at("first"), 0u);
  EXPECT_EQ(p.instructions[0].imm, -7);
  EXPECT_EQ(p.instructions[1].ra, 1);
  EXPECT_EQ(p.instructions[1].imm, -4);
  EXPECT_EQ(p.instructions[2].imm, 0);
  EXPECT_EQ(p.instructions[1].source_line, 8);
}

TEST(Parse, DeterministicAndEqualOnRepeat) {
  for (const auto& [name, text] : tadb::testing::corpus_programs()) {
    SCOPED_TRACE(name);
    EXPECT_TRUE(parse_program(text) == parse_program(text));
  }
}

TEST(Parse, SyncClassificationIsByOpcode) {
  const std::set<Opcode> sync = {Opcode::Ldg, Opcode::Stg, Opcode::Lock, Opcode::Unlock, Opcode::Spawn, Opcode::Join};
  for (std::size_t i = 0; i < kOpcodeCount; ++i) {
    auto op = static_cast<Opcode>(i);
    EXPECT_EQ(is_sync_capable(op), sync.count(op) == 1) << mnemonic(op);
    EXPECT_EQ(opcode_from_mnemonic(mnemonic(op)), op);
  }
  EXPECT_FALSE(opcode_from_mnemonic("nop").has_value());
}

TEST(Disassemble, CanonicalForms) {
  auto p = parse_program("main: li r1, 5\n ldg r2, [r0+4]\n stg r3, [r1-2]\n beq r1, r2, main\n spawn r4, main\n"
                         " join r4\n lock 0\n print r1\n halt\n.locks 1\n.globals 8");
  EXPECT_EQ(disassemble(p, 0), "li r1, 5");
  EXPECT_EQ(disassemble(p, 1), "ldg r2, [r0+4]");
  EXPECT_EQ(disassemble(p, 2), "stg r3, [r1-2]");
  EXPECT_EQ(disassemble(p, 3), "beq r1, r2, main");
  EXPECT_EQ(disassemble(p, 4), "spawn r4, main");
  EXPECT_EQ(disassemble(p, 5), "join r4");
  EXPECT_EQ(disassemble(p, 6), "lock 0");
  EXPECT_EQ(disassemble(p, 7), "print r1");
  EXPECT_EQ(disassemble(p, 8), "halt");
}

TEST(Disassemble, IndexOutOfRange) {
  auto p = parse_program("main: halt");
  try {
    disassemble(p, 1);
    FAIL() << "expected out-of-range";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "out-of-range");
  }
}

TEST(Disassemble, RoundTripsOverCorpus) {
  for (const auto& [name, text] : tadb::testing::corpus_programs()) {
    SCOPED_TRACE(name);
    auto p = parse_program(text);
    for (std::size_t i = 0; i < p.instructions.size(); ++i) {
      // Labels of the original program are defined so branch text resolves.
      auto line = disassemble(p, i);
      std::string probe = "__probe: " + line + "\n";
      for (const auto& [label, index] : p.labels) probe += label + ": halt\n";
      auto q = parse_program(p.labels.count("main") ? probe : probe + "main: halt\n");
      auto back = q.instructions[0];
      const auto& orig = p.instructions[i];
      EXPECT_EQ(back.op, orig.op) << line;
      EXPECT_EQ(back.rd, orig.rd) << line;
      EXPECT_EQ(back.ra, orig.ra) << line;
      EXPECT_EQ(back.rb, orig.rb) << line;
      EXPECT_EQ(back.imm, orig.imm) << line;
      if (!orig.label.empty()) EXPECT_EQ(back.label, orig.label) << line;
    }
  }
}

TEST(Disassemble, WholeProgramReparsesEquivalent) {
  for (const auto& [name, text] : tadb::testing::corpus_programs()) {
    SCOPED_TRACE(name);
    auto p = parse_program(text);
    // Emit every label before its instruction and the directives verbatim.
    std::string out = ".globals " + std::to_string(p.globals_size) + "\n.locks " + std::to_string(p.locks_count) + "\n";
    for (const auto& t : p.initial_threads) out += ".thread " + t + "\n";
    for (std::size_t i = 0; i < p.instructions.size(); ++i) {
      for (const auto& [label, index] : p.labels)
        if (index == i) out += label + ":\n";
      out += "    " + disassemble(p, i) + "\n";
    }
    auto q = parse_program(out);
    ASSERT_EQ(q.instructions.size(), p.instructions.size());
    for (std::size_t i = 0; i < p.instructions.size(); ++i)
      EXPECT_TRUE(q.instructions[i].equivalent(p.instructions[i])) << disassemble(p, i);
    EXPECT_EQ(q.labels, p.labels);
  }
}

TEST(Locations, ResolveForms) {
  auto p = parse_program("main: li r1, 1\n li r2, 2\nloop: addi r1, r1, 1\n blt r1, r2, loop\n halt\n");
  EXPECT_EQ(p.resolve_location("main"), 0u);
  EXPECT_EQ(p.resolve_location("main+1"), 1u);
  EXPECT_EQ(p.resolve_location("loop+2"), 4u);
  EXPECT_EQ(p.resolve_location("@3"), 3u);
  EXPECT_EQ(p.resolve_location("3"), 2u);  // source line 3
  EXPECT_FALSE(p.resolve_location("9999").has_value());
  EXPECT_FALSE(p.resolve_location("loop+3").has_value());
  EXPECT_FALSE(p.resolve_location("nowhere").has_value());
  EXPECT_FALSE(p.resolve_location("@5").has_value());
  EXPECT_EQ(p.location_name(1), "main+1");
  EXPECT_EQ(p.location_name(2), "loop");
  EXPECT_EQ(p.location_name(4), "loop+2");
}

// Counted by hand from corpus/racey.tasm: main 9 + fold 6 + worker setup 7 +
// loop body 13 + halt.
TEST(Corpus, RaceyFileMatchesGeneratorAndHandCount) {
  auto text = corpus("racey.tasm");
  EXPECT_EQ(text, racey_source());
  auto p = parse_program(text);
  EXPECT_EQ(p.instructions.size(), 36u);
  std::set<std::string> labels;
  for (const auto& [l, i] : p.labels) labels.insert(l);
  EXPECT_EQ(labels, (std::set<std::string>{"main", "fold", "worker", "loop"}));
  EXPECT_EQ(p.labels.at("fold"), 9u);
  EXPECT_EQ(p.labels.at("worker"), 15u);
  EXPECT_EQ(p.labels.at("loop"), 22u);
  EXPECT_EQ(p.globals_size, 18);
}
