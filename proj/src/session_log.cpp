#include "tadb/session_log.hpp"

#include <nlohmann/json.hpp>

#include "tadb/error.hpp"
#include "tadb/hash.hpp"

namespace tadb {

using json = nlohmann::json;

namespace {

constexpr std::string_view kFormat = "tadb-session";

struct CommandEntry {
  Action::Kind kind;
  std::string_view name;
};

constexpr CommandEntry kCommands[] = {
    {Action::Kind::BreakAdd, "break-add"}, {Action::Kind::BreakDel, "break-del"},
    {Action::Kind::Continue, "continue"},  {Action::Kind::Step, "step"},
    {Action::Kind::SyncStep, "syncstep"},  {Action::Kind::WriteReg, "write-reg"},
    {Action::Kind::WriteGlob, "write-glob"}, {Action::Kind::SetTime, "set-time"},
    {Action::Kind::Reset, "reset"},
};

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error("malformed-log", "session log line " + std::to_string(line) + ": " + why);
}

std::uint64_t parse_hex(const json& value, std::size_t line) {
  if (!value.is_string()) malformed(line, "hash must be a hex string");
  const auto& s = value.get_ref<const std::string&>();
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
    malformed(line, "bad hash \"" + s + "\"");
  return std::stoull(s, nullptr, 16);
}

template <typename T>
T require_int(const json& args, const char* key, std::size_t line) {
  if (!args.contains(key)) malformed(line, std::string("missing \"") + key + "\"");
  const auto& v = args.at(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      malformed(line, std::string("\"") + key + "\" must be a non-negative integer");
  } else {
    if (!v.is_number_integer()) malformed(line, std::string("\"") + key + "\" must be an integer");
  }
  return v.get<T>();
}

json action_to_json(const Action& a) {
  json args = json::object();
  switch (a.kind) {
    case Action::Kind::BreakAdd:
      args["location"] = a.location;
      if (a.tid) args["tid"] = *a.tid;
      break;
    case Action::Kind::BreakDel:
      args["id"] = a.id;
      break;
    case Action::Kind::WriteReg:
      args["tid"] = *a.tid;
      args["reg"] = a.index;
      args["value"] = a.value;
      break;
    case Action::Kind::WriteGlob:
      args["index"] = a.index;
      args["value"] = a.value;
      break;
    case Action::Kind::SetTime:
      args["tid"] = *a.tid;
      args["time"] = a.time;
      if (a.pc) args["pc"] = *a.pc;
      break;
    default:
      break;
  }
  return json{{"cmd", command_name(a.kind)}, {"args", args}};
}

Action action_from_json(const json& j, std::size_t line) {
  if (!j.is_object() || !j.contains("cmd") || !j.at("cmd").is_string()) malformed(line, "expected {\"cmd\": ...}");
  const auto& name = j.at("cmd").get_ref<const std::string&>();
  json args = j.value("args", json::object());
  if (!args.is_object()) malformed(line, "\"args\" must be an object");

  Action a;
  bool known = false;
  for (const auto& entry : kCommands) {
    if (entry.name == name) {
      a.kind = entry.kind;
      known = true;
    }
  }
  if (!known) malformed(line, "unknown action \"" + name + "\"");

  switch (a.kind) {
    case Action::Kind::BreakAdd:
      if (!args.contains("location") || !args.at("location").is_string()) malformed(line, "missing \"location\"");
      a.location = args.at("location").get<std::string>();
      if (args.contains("tid")) a.tid = require_int<Tid>(args, "tid", line);
      break;
    case Action::Kind::BreakDel:
      a.id = require_int<int>(args, "id", line);
      break;
    case Action::Kind::WriteReg:
      a.tid = require_int<Tid>(args, "tid", line);
      a.index = require_int<std::int64_t>(args, "reg", line);
      a.value = require_int<Word>(args, "value", line);
      break;
    case Action::Kind::WriteGlob:
      a.index = require_int<std::int64_t>(args, "index", line);
      a.value = require_int<Word>(args, "value", line);
      break;
    case Action::Kind::SetTime:
      a.tid = require_int<Tid>(args, "tid", line);
      a.time = require_int<Cycles>(args, "time", line);
      if (args.contains("pc")) a.pc = require_int<std::uint32_t>(args, "pc", line);
      break;
    default:
      break;
  }
  return a;
}

}  // namespace

std::string_view command_name(Action::Kind kind) {
  for (const auto& entry : kCommands)
    if (entry.kind == kind) return entry.name;
  return "?";
}

std::string SessionLog::serialize() const {
  json header{{"format", kFormat},
              {"version", kSessionLogVersion},
              {"program_hash", hex64(program_hash)},
              {"model_hash", hex64(model_hash)},
              {"mode", mode.kind == SchedulerMode::Kind::Deterministic ? "det" : "rand"},
              {"seed", mode.seed}};
  std::string out = header.dump() + "\n";
  for (const auto& a : actions) out += action_to_json(a).dump() + "\n";
  return out;
}

SessionLog SessionLog::parse(std::string_view text) {
  SessionLog log;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) malformed(line_no, "not valid JSON");

    if (!have_header) {
      if (!j.is_object() || j.value("format", "") != kFormat) malformed(line_no, "missing session header");
      if (j.value("version", -1) != kSessionLogVersion) malformed(line_no, "unsupported session log version");
      log.program_hash = parse_hex(j.value("program_hash", json()), line_no);
      log.model_hash = parse_hex(j.value("model_hash", json()), line_no);
      auto mode = j.value("mode", "");
      if (mode == "det") {
        log.mode = SchedulerMode::deterministic();
      } else if (mode == "rand") {
        log.mode = SchedulerMode::random(require_int<std::uint64_t>(j, "seed", line_no));
      } else {
        malformed(line_no, "mode must be det or rand");
      }
      have_header = true;
      continue;
    }
    log.actions.push_back(action_from_json(j, line_no));
  }
  if (!have_header) malformed(0, "empty session log");
  return log;
}

}  // namespace tadb
