#include "tadb/isa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "tadb/error.hpp"

namespace tadb {

namespace {

constexpr std::array<std::string_view, kOpcodeCount> kMnemonics = {
    "li",  "mov", "add", "sub", "mul",  "div",    "rem",   "and",  "or",   "xor",   "addi", "beq",
    "bne", "blt", "jmp", "ldg", "stg",  "lock",   "unlock", "spawn", "join", "print", "halt",
};

enum class Form {
  RegImm,     // li
  RegReg,     // mov
  RegRegReg,  // add .. xor
  RegRegImm,  // addi
  Branch,     // beq/bne/blt
  Jump,       // jmp
  Memory,     // ldg/stg
  LockIndex,  // lock/unlock
  Spawn,      // spawn
  Reg,        // join/print
  None,       // halt
};

Form form_of(Opcode op) {
  switch (op) {
    case Opcode::Li:
      return Form::RegImm;
    case Opcode::Mov:
      return Form::RegReg;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div:
    case Opcode::Rem:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
      return Form::RegRegReg;
    case Opcode::Addi:
      return Form::RegRegImm;
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt:
      return Form::Branch;
    case Opcode::Jmp:
      return Form::Jump;
    case Opcode::Ldg:
    case Opcode::Stg:
      return Form::Memory;
    case Opcode::Lock:
    case Opcode::Unlock:
      return Form::LockIndex;
    case Opcode::Spawn:
      return Form::Spawn;
    case Opcode::Join:
    case Opcode::Print:
      return Form::Reg;
    case Opcode::Halt:
      return Form::None;
  }
  return Form::None;
}

std::size_t operand_count(Form form) {
  switch (form) {
    case Form::RegRegReg:
    case Form::RegRegImm:
    case Form::Branch:
      return 3;
    case Form::RegImm:
    case Form::RegReg:
    case Form::Memory:
    case Form::Spawn:
      return 2;
    case Form::Jump:
    case Form::LockIndex:
    case Form::Reg:
      return 1;
    case Form::None:
      return 0;
  }
  return 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

struct PendingRef {
  std::size_t instruction;
  std::string label;
  int line;
};

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  Program run() {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= source_.size()) {
      std::size_t eol = source_.find('\n', pos);
      if (eol == std::string_view::npos) eol = source_.size();
      ++line_no;
      parse_line(source_.substr(pos, eol - pos), line_no);
      pos = eol + 1;
    }
    resolve();
    return std::move(program_);
  }

 private:
  void parse_line(std::string_view line, int line_no) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty() && line.back() == '\r') line = trim(line.substr(0, line.size() - 1));

    // Leading "name:" labels.
    while (!line.empty()) {
      std::size_t n = 0;
      if (!is_ident_start(line[0])) break;
      while (n < line.size() && is_ident_char(line[n])) ++n;
      if (n >= line.size() || line[n] != ':') break;
      define_label(std::string(line.substr(0, n)), line_no);
      line = trim(line.substr(n + 1));
    }
    if (line.empty()) return;

    std::size_t word_end = 0;
    while (word_end < line.size() && !std::isspace(static_cast<unsigned char>(line[word_end]))) ++word_end;
    std::string_view word = line.substr(0, word_end);
    std::string_view rest = trim(line.substr(word_end));

    if (word.front() == '.') {
      parse_directive(word, rest, line_no);
      return;
    }
    auto op = opcode_from_mnemonic(word);
    if (!op) throw ParseError("syntax", line_no, std::string(word), "unknown opcode");
    parse_instruction(*op, rest, line_no);
  }

  void define_label(std::string name, int line_no) {
    auto index = static_cast<std::uint32_t>(program_.instructions.size());
    if (!program_.labels.emplace(name, index).second)
      throw ParseError("duplicate-label", line_no, name, "duplicate label");
  }

  void parse_directive(std::string_view word, std::string_view rest, int line_no) {
    if (word == ".thread") {
      if (!is_identifier(rest)) throw ParseError("syntax", line_no, std::string(rest), "expected thread entry label");
      program_.initial_threads.emplace_back(rest);
      thread_lines_.push_back(line_no);
      return;
    }
    if (word == ".globals" || word == ".locks") {
      auto n = parse_int(rest);
      if (!n || *n < 0) throw ParseError("syntax", line_no, std::string(rest), "expected non-negative count");
      (word == ".globals" ? program_.globals_size : program_.locks_count) = *n;
      return;
    }
    throw ParseError("syntax", line_no, std::string(word), "unknown directive");
  }

  std::uint8_t reg(std::string_view tok, int line_no) {
    if (tok.size() < 2 || tok[0] != 'r') throw ParseError("syntax", line_no, std::string(tok), "expected register");
    auto n = parse_int(tok.substr(1));
    if (!n || tok[1] == '+' || tok[1] == '-') throw ParseError("syntax", line_no, std::string(tok), "expected register");
    if (*n < 0 || *n >= kRegisterCount)
      throw ParseError("bad-register", line_no, std::string(tok), "register index out of range");
    return static_cast<std::uint8_t>(*n);
  }

  std::int64_t imm(std::string_view tok, int line_no) {
    auto n = parse_int(tok);
    if (!n) throw ParseError("syntax", line_no, std::string(tok), "expected integer immediate");
    return *n;
  }

  void label_ref(Instruction& ins, std::string_view tok, int line_no) {
    if (!tok.empty() && tok.front() == '@') {
      auto n = parse_int(tok.substr(1));
      if (!n || *n < 0) throw ParseError("syntax", line_no, std::string(tok), "expected instruction index");
      ins.target = static_cast<std::uint32_t>(*n);
      index_refs_.push_back({program_.instructions.size(), std::string(tok), line_no});
      return;
    }
    if (!is_identifier(tok)) throw ParseError("syntax", line_no, std::string(tok), "expected label");
    ins.label = std::string(tok);
    refs_.push_back({program_.instructions.size(), ins.label, line_no});
  }

  void memory(Instruction& ins, std::string_view tok, int line_no) {
    if (tok.size() < 3 || tok.front() != '[' || tok.back() != ']')
      throw ParseError("syntax", line_no, std::string(tok), "expected [rB+imm]");
    std::string_view inner = trim(tok.substr(1, tok.size() - 2));
    std::size_t split = inner.find_first_of("+-");
    ins.ra = reg(trim(inner.substr(0, split)), line_no);
    ins.imm = 0;
    if (split == std::string_view::npos) return;
    std::string_view offset = trim(inner.substr(split));
    if (offset.front() == '+') offset = trim(offset.substr(1));
    auto n = parse_int(offset);
    if (!n) throw ParseError("syntax", line_no, std::string(tok), "bad global offset");
    ins.imm = *n;
  }

  void parse_instruction(Opcode op, std::string_view rest, int line_no) {
    Instruction ins;
    ins.op = op;
    ins.source_line = line_no;
    Form form = form_of(op);
    auto ops = split_operands(rest);
    if (ops.size() != operand_count(form) || std::any_of(ops.begin(), ops.end(), [](auto s) { return s.empty(); })) {
      throw ParseError("syntax", line_no, std::string(rest),
                       "expected " + std::to_string(operand_count(form)) + " operand(s) for " + std::string(mnemonic(op)));
    }
    switch (form) {
      case Form::RegImm:
        ins.rd = reg(ops[0], line_no);
        ins.imm = imm(ops[1], line_no);
        break;
      case Form::RegReg:
        ins.rd = reg(ops[0], line_no);
        ins.ra = reg(ops[1], line_no);
        break;
      case Form::RegRegReg:
        ins.rd = reg(ops[0], line_no);
        ins.ra = reg(ops[1], line_no);
        ins.rb = reg(ops[2], line_no);
        break;
      case Form::RegRegImm:
        ins.rd = reg(ops[0], line_no);
        ins.ra = reg(ops[1], line_no);
        ins.imm = imm(ops[2], line_no);
        break;
      case Form::Branch:
        ins.ra = reg(ops[0], line_no);
        ins.rb = reg(ops[1], line_no);
        label_ref(ins, ops[2], line_no);
        break;
      case Form::Jump:
        label_ref(ins, ops[0], line_no);
        break;
      case Form::Memory:
        ins.rd = reg(ops[0], line_no);
        memory(ins, ops[1], line_no);
        break;
      case Form::LockIndex:
        ins.imm = imm(ops[0], line_no);
        if (ins.imm < 0) throw ParseError("syntax", line_no, std::string(ops[0]), "lock index must be non-negative");
        break;
      case Form::Spawn:
        ins.rd = reg(ops[0], line_no);
        label_ref(ins, ops[1], line_no);
        break;
      case Form::Reg:
        ins.ra = reg(ops[0], line_no);
        break;
      case Form::None:
        break;
    }
    program_.instructions.push_back(std::move(ins));
  }

  std::uint32_t lookup(const std::string& label, int line_no) const {
    auto it = program_.labels.find(label);
    if (it == program_.labels.end() || it->second >= program_.instructions.size())
      throw ParseError("undefined-label", line_no, label, "undefined label");
    return it->second;
  }

  void resolve() {
    for (const auto& ref : refs_) program_.instructions[ref.instruction].target = lookup(ref.label, ref.line);
    for (const auto& ref : index_refs_) {
      if (program_.instructions[ref.instruction].target >= program_.instructions.size())
        throw ParseError("undefined-label", ref.line, ref.label, "instruction index out of range");
    }
    if (program_.initial_threads.empty()) {
      if (!program_.labels.contains("main") || program_.labels.at("main") >= program_.instructions.size())
        throw ParseError("missing-entry", 0, "main", "no .thread directive and no main label");
      program_.initial_threads.emplace_back("main");
    } else {
      for (std::size_t i = 0; i < program_.initial_threads.size(); ++i)
        lookup(program_.initial_threads[i], thread_lines_[i]);
    }
  }

  std::string_view source_;
  Program program_;
  std::vector<PendingRef> refs_;
  std::vector<PendingRef> index_refs_;
  std::vector<int> thread_lines_;
};

}  // namespace

std::string_view mnemonic(Opcode op) { return kMnemonics[static_cast<std::size_t>(op)]; }

std::optional<Opcode> opcode_from_mnemonic(std::string_view text) {
  for (std::size_t i = 0; i < kMnemonics.size(); ++i)
    if (kMnemonics[i] == text) return static_cast<Opcode>(i);
  return std::nullopt;
}

bool Instruction::equivalent(const Instruction& other) const {
  if (op != other.op) return false;
  switch (form_of(op)) {
    case Form::RegImm:
      return rd == other.rd && imm == other.imm;
    case Form::RegReg:
      return rd == other.rd && ra == other.ra;
    case Form::RegRegReg:
      return rd == other.rd && ra == other.ra && rb == other.rb;
    case Form::RegRegImm:
      return rd == other.rd && ra == other.ra && imm == other.imm;
    case Form::Branch:
      return ra == other.ra && rb == other.rb && target == other.target;
    case Form::Jump:
      return target == other.target;
    case Form::Memory:
      return rd == other.rd && ra == other.ra && imm == other.imm;
    case Form::LockIndex:
      return imm == other.imm;
    case Form::Spawn:
      return rd == other.rd && target == other.target;
    case Form::Reg:
      return ra == other.ra;
    case Form::None:
      return true;
  }
  return false;
}

std::uint32_t Program::entry_of(const std::string& label) const { return labels.at(label); }

std::string Program::location_name(std::uint32_t index) const {
  const std::string* best = nullptr;
  std::uint32_t best_index = 0;
  for (const auto& [name, at] : labels) {
    if (at <= index && (best == nullptr || at > best_index)) {
      best = &name;
      best_index = at;
    }
  }
  if (best == nullptr) return "@" + std::to_string(index);
  if (best_index == index) return *best;
  return *best + "+" + std::to_string(index - best_index);
}

std::optional<std::uint32_t> Program::resolve_location(std::string_view text) const {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::optional<std::int64_t> index;
  if (text.front() == '@') {
    index = parse_int(text.substr(1));
  } else if (std::isdigit(static_cast<unsigned char>(text.front()))) {
    auto line = parse_int(text);
    if (!line) return std::nullopt;
    for (std::size_t i = 0; i < instructions.size(); ++i)
      if (instructions[i].source_line == *line) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  } else {
    std::size_t plus = text.find('+');
    auto it = labels.find(std::string(trim(text.substr(0, plus))));
    if (it == labels.end()) return std::nullopt;
    std::int64_t offset = 0;
    if (plus != std::string_view::npos) {
      auto n = parse_int(trim(text.substr(plus + 1)));
      if (!n || *n < 0) return std::nullopt;
      offset = *n;
    }
    index = static_cast<std::int64_t>(it->second) + offset;
  }
  if (!index || *index < 0 || *index >= static_cast<std::int64_t>(instructions.size())) return std::nullopt;
  return static_cast<std::uint32_t>(*index);
}

bool Program::operator==(const Program& other) const {
  if (instructions.size() != other.instructions.size()) return false;
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    const auto& a = instructions[i];
    const auto& b = other.instructions[i];
    if (!a.equivalent(b) || a.source_line != b.source_line || a.label != b.label) return false;
  }
  return labels == other.labels && globals_size == other.globals_size && locks_count == other.locks_count &&
         initial_threads == other.initial_threads;
}

Program parse_program(std::string_view source) { return Parser(source).run(); }

std::string disassemble(const Instruction& ins) {
  auto r = [](std::uint8_t n) { return "r" + std::to_string(n); };
  std::string target = ins.label.empty() ? "@" + std::to_string(ins.target) : ins.label;
  std::string out(mnemonic(ins.op));
  switch (form_of(ins.op)) {
    case Form::RegImm:
      return out + " " + r(ins.rd) + ", " + std::to_string(ins.imm);
    case Form::RegReg:
      return out + " " + r(ins.rd) + ", " + r(ins.ra);
    case Form::RegRegReg:
      return out + " " + r(ins.rd) + ", " + r(ins.ra) + ", " + r(ins.rb);
    case Form::RegRegImm:
      return out + " " + r(ins.rd) + ", " + r(ins.ra) + ", " + std::to_string(ins.imm);
    case Form::Branch:
      return out + " " + r(ins.ra) + ", " + r(ins.rb) + ", " + target;
    case Form::Jump:
      return out + " " + target;
    case Form::Memory:
      return out + " " + r(ins.rd) + ", [" + r(ins.ra) + (ins.imm >= 0 ? "+" : "") + std::to_string(ins.imm) + "]";
    case Form::LockIndex:
      return out + " " + std::to_string(ins.imm);
    case Form::Spawn:
      return out + " " + r(ins.rd) + ", " + target;
    case Form::Reg:
      return out + " " + r(ins.ra);
    case Form::None:
      return out;
  }
  return out;
}

std::string disassemble(const Program& program, std::size_t index) {
  if (index >= program.instructions.size())
    throw Error("out-of-range", "instruction index " + std::to_string(index) + " out of range");
  return disassemble(program.instructions[index]);
}

}  // namespace tadb
