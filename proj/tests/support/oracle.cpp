#include "support/oracle.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace tadb::testing {

std::vector<OracleThread> annotate_independently(const Program& program,
                                                 const std::map<std::string, std::uint64_t>& costs) {
  auto cost = [&](Opcode op) {
    auto it = costs.find(std::string(mnemonic(op)));
    return it != costs.end() ? it->second : costs.at("default");
  };
  std::vector<OracleThread> out;
  for (const auto& entry : program.initial_threads) {
    OracleThread th;
    std::array<std::uint64_t, 16> r{};
    std::uint32_t pc = program.labels.at(entry);
    std::uint64_t clock = 0;
    const auto tid = static_cast<std::uint32_t>(out.size());
    for (std::uint64_t guard = 0;; ++guard) {
      if (guard > 1'000'000) throw std::runtime_error("oracle: runaway thread");
      const auto& ins = program.instructions.at(pc);
      std::uint32_t next = pc + 1;
      auto sr = [&](int i) { return static_cast<std::int64_t>(r[i]); };
      switch (ins.op) {
        case Opcode::Ldg:
          th.arrivals.push_back({tid, pc, clock});
          r[ins.rd] = 0;
          break;
        case Opcode::Stg:
          th.arrivals.push_back({tid, pc, clock});
          break;
        case Opcode::Li: r[ins.rd] = static_cast<std::uint64_t>(ins.imm); break;
        case Opcode::Mov: r[ins.rd] = r[ins.ra]; break;
        case Opcode::Add: r[ins.rd] = r[ins.ra] + r[ins.rb]; break;
        case Opcode::Sub: r[ins.rd] = r[ins.ra] - r[ins.rb]; break;
        case Opcode::Mul: r[ins.rd] = r[ins.ra] * r[ins.rb]; break;
        case Opcode::And: r[ins.rd] = r[ins.ra] & r[ins.rb]; break;
        case Opcode::Or: r[ins.rd] = r[ins.ra] | r[ins.rb]; break;
        case Opcode::Xor: r[ins.rd] = r[ins.ra] ^ r[ins.rb]; break;
        case Opcode::Addi: r[ins.rd] = r[ins.ra] + static_cast<std::uint64_t>(ins.imm); break;
        case Opcode::Div:
        case Opcode::Rem: {
          if (r[ins.rb] == 0) th.trapped = true;
          else if (sr(ins.rb) == -1) r[ins.rd] = ins.op == Opcode::Div ? 0 - r[ins.ra] : 0;
          else r[ins.rd] = static_cast<std::uint64_t>(ins.op == Opcode::Div ? sr(ins.ra) / sr(ins.rb) : sr(ins.ra) % sr(ins.rb));
          break;
        }
        case Opcode::Beq: if (r[ins.ra] == r[ins.rb]) next = ins.target; break;
        case Opcode::Bne: if (r[ins.ra] != r[ins.rb]) next = ins.target; break;
        case Opcode::Blt: if (sr(ins.ra) < sr(ins.rb)) next = ins.target; break;
        case Opcode::Jmp: next = ins.target; break;
        case Opcode::Print: break;
        case Opcode::Halt: break;
        default:
          throw std::runtime_error("oracle: unsupported opcode " + std::string(mnemonic(ins.op)));
      }
      if (th.trapped) break;
      clock += cost(ins.op);
      if (ins.op == Opcode::Halt) break;
      pc = next;
    }
    th.final_clock = clock;
    out.push_back(th);
  }
  return out;
}

std::vector<OracleArrival> merge_by_time(const std::vector<OracleThread>& threads) {
  std::vector<OracleArrival> all;
  for (const auto& t : threads) all.insert(all.end(), t.arrivals.begin(), t.arrivals.end());
  std::stable_sort(all.begin(), all.end(), [](const OracleArrival& a, const OracleArrival& b) {
    return a.time != b.time ? a.time < b.time : a.tid < b.tid;
  });
  return all;
}

}  // namespace tadb::testing
