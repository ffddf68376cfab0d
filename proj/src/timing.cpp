#include "tadb/timing.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <string>

#include "tadb/error.hpp"

namespace tadb {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

TimingModel::TimingModel(Cycles default_cost) : default_cost_(default_cost) {
  if (default_cost == 0) throw Error("bad-model", "timing costs must be positive");
  costs_.fill(default_cost);
}

Cycles TimingModel::cost(std::string_view text) const {
  auto op = opcode_from_mnemonic(text);
  return op ? cost(*op) : default_cost_;
}

void TimingModel::set_cost(Opcode op, Cycles cycles) {
  if (cycles == 0) throw Error("bad-model", "timing costs must be positive");
  costs_[static_cast<std::size_t>(op)] = cycles;
}

TimingModel load_model(std::string_view config_text) {
  std::map<Opcode, Cycles> overrides;
  std::optional<Cycles> default_cost;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= config_text.size()) {
    std::size_t eol = config_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = config_text.size();
    std::string_view line = config_text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("bad-model", line_no, std::string(line), "expected key=value");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));

    std::int64_t cycles = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), cycles);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
      throw ParseError("bad-model", line_no, std::string(value), "expected decimal cost");
    if (cycles <= 0) throw ParseError("bad-model", line_no, std::string(value), "non-positive cost");

    if (key == "default") {
      default_cost = static_cast<Cycles>(cycles);
    } else if (auto op = opcode_from_mnemonic(key)) {
      overrides[*op] = static_cast<Cycles>(cycles);
    } else {
      throw ParseError("bad-model", line_no, std::string(key), "unknown key");
    }
  }
  if (!default_cost) throw Error("bad-model", "timing model is missing the mandatory default key");

  TimingModel model(*default_cost);
  for (auto [op, cycles] : overrides) model.set_cost(op, cycles);
  return model;
}

}  // namespace tadb
