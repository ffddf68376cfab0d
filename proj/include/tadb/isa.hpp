#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tadb {

inline constexpr int kRegisterCount = 16;

enum class Opcode : std::uint8_t {
  Li,
  Mov,
  Add,
  Sub,
  Mul,
  Div,
  Rem,
  And,
  Or,
  Xor,
  Addi,
  Beq,
  Bne,
  Blt,
  Jmp,
  Ldg,
  Stg,
  Lock,
  Unlock,
  Spawn,
  Join,
  Print,
  Halt,
};

inline constexpr std::size_t kOpcodeCount = static_cast<std::size_t>(Opcode::Halt) + 1;

std::string_view mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view text);

// Sync-capable opcodes are the only ones whose execution order is visible to
// other threads: global loads/stores, lock operations and thread creation/join.
constexpr bool is_sync_capable(Opcode op) {
  switch (op) {
    case Opcode::Ldg:
    case Opcode::Stg:
    case Opcode::Lock:
    case Opcode::Unlock:
    case Opcode::Spawn:
    case Opcode::Join:
      return true;
    default:
      return false;
  }
}

// Operand usage per opcode:
//   li rd, imm            mov rd, ra             add..xor rd, ra, rb
//   addi rd, ra, imm      beq/bne/blt ra, rb, L  jmp L
//   ldg rd, [ra+imm]      stg rd, [ra+imm]       lock imm / unlock imm
//   spawn rd, L           join ra                print ra
//   halt
struct Instruction {
  Opcode op = Opcode::Halt;
  std::uint8_t rd = 0;
  std::uint8_t ra = 0;
  std::uint8_t rb = 0;
  std::int64_t imm = 0;
  std::uint32_t target = 0;  // resolved label index for branches/jmp/spawn
  std::string label;         // label text as written, for listings
  int source_line = 0;

  // Structural equality; ignores source_line and label spelling.
  bool equivalent(const Instruction& other) const;
};

struct Program {
  std::vector<Instruction> instructions;
  std::map<std::string, std::uint32_t> labels;
  std::int64_t globals_size = 0;
  std::int64_t locks_count = 0;
  std::vector<std::string> initial_threads;

  std::uint32_t entry_of(const std::string& label) const;
  // Best label-relative name for an instruction index ("loop+2"), or "@idx".
  std::string location_name(std::uint32_t index) const;
  // Accepts "label", "label+N", "@index" or a bare source line number.
  std::optional<std::uint32_t> resolve_location(std::string_view text) const;

  bool operator==(const Program& other) const;
};

Program parse_program(std::string_view source);
std::string disassemble(const Program& program, std::size_t index);
std::string disassemble(const Instruction& instruction);

}  // namespace tadb
