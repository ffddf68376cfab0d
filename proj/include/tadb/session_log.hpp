#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tadb/machine.hpp"
#include "tadb/scheduler.hpp"

namespace tadb {

inline constexpr int kSessionLogVersion = 1;

// One logical user action. Serialized exactly like a protocol request
// ({"cmd": ..., "args": {...}}) minus the request id.
struct Action {
  enum class Kind { BreakAdd, BreakDel, Continue, Step, SyncStep, WriteReg, WriteGlob, SetTime, Reset };
  Kind kind = Kind::Continue;
  std::string location;         // BreakAdd
  std::optional<Tid> tid;       // BreakAdd filter, WriteReg, SetTime
  int id = 0;                   // BreakDel
  std::int64_t index = 0;       // WriteReg register / WriteGlob word
  Word value = 0;               // WriteReg / WriteGlob
  Cycles time = 0;              // SetTime
  std::optional<std::uint32_t> pc;  // SetTime: pending occurrence guard

  bool operator==(const Action&) const = default;
};

std::string_view command_name(Action::Kind kind);

struct SessionLog {
  std::uint64_t program_hash = 0;
  std::uint64_t model_hash = 0;
  SchedulerMode mode;
  std::vector<Action> actions;

  // Header line then one JSON object per action, LF-terminated.
  std::string serialize() const;
  // Validates every line before returning; throws Error("malformed-log").
  static SessionLog parse(std::string_view text);

  bool operator==(const SessionLog&) const = default;
};

}  // namespace tadb
