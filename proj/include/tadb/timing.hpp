#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "tadb/isa.hpp"

namespace tadb {

using Cycles = std::uint64_t;

// Per-opcode constant cycle costs. Every cost is >= 1 so a thread's virtual
// clock strictly advances with each executed instruction.
class TimingModel {
 public:
  // Uniform model: every opcode costs `default_cost`.
  explicit TimingModel(Cycles default_cost = 1);

  Cycles cost(Opcode op) const { return costs_[static_cast<std::size_t>(op)]; }
  // Total over arbitrary text; unknown mnemonics fall back to the default.
  Cycles cost(std::string_view mnemonic) const;
  Cycles default_cost() const { return default_cost_; }

  void set_cost(Opcode op, Cycles cycles);

  bool operator==(const TimingModel&) const = default;

 private:
  Cycles default_cost_;
  std::array<Cycles, kOpcodeCount> costs_{};
};

// Parses `key=value` lines (`#` comments). `default` is mandatory.
TimingModel load_model(std::string_view config_text);

}  // namespace tadb
