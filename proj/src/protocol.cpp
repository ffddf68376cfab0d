#include "tadb/protocol.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "tadb/error.hpp"

namespace tadb {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json to_json(const PendingSync& p) {
  return {{"tid", p.tid}, {"time", p.time}, {"kind", to_string(p.kind)}, {"addr", p.target}, {"pc", p.pc}};
}

json to_json(const SyncEvent& e, const Program& program) {
  json addr = e.target;
  if (e.kind == SyncKind::Spawn) addr = program.location_name(static_cast<std::uint32_t>(e.target));
  return {{"seq", e.seq}, {"tid", e.tid}, {"time", e.time}, {"kind", to_string(e.kind)}, {"addr", addr}, {"pc", e.pc}};
}

namespace {

json snapshot_json(const std::vector<ThreadSnapshot>& snapshot, const Program& program) {
  json out = json::array();
  for (const auto& t : snapshot) {
    json j = {{"tid", t.tid},
              {"status", to_string(t.status)},
              {"pc", t.pc},
              {"location", program.location_name(t.pc)},
              {"clock", t.clock},
              {"pending_time", nullptr}};
    if (t.pending) {
      j["pending_time"] = t.pending->time;
      j["pending_kind"] = to_string(t.pending->kind);
    }
    out.push_back(std::move(j));
  }
  return out;
}

const json& arg(const json& args, const char* name) {
  if (!args.contains(name)) throw Error("bad-args", std::string("missing argument \"") + name + "\"");
  return args.at(name);
}

std::int64_t int_arg(const json& args, const char* name) {
  const auto& v = arg(args, name);
  if (!v.is_number_integer()) throw Error("bad-args", std::string("argument \"") + name + "\" must be an integer");
  return v.get<std::int64_t>();
}

Tid tid_arg(const json& args, const char* name = "tid") {
  auto v = int_arg(args, name);
  if (v < 0) throw Error("bad-args", "thread ids are non-negative");
  return static_cast<Tid>(v);
}

std::string string_arg(const json& args, const char* name) {
  const auto& v = arg(args, name);
  if (!v.is_string()) throw Error("bad-args", std::string("argument \"") + name + "\" must be a string");
  return v.get<std::string>();
}

SchedulerMode mode_arg(const json& args) {
  auto mode = string_arg(args, "mode");
  if (mode == "det") return SchedulerMode::deterministic();
  if (mode == "rand") {
    std::uint64_t seed = 0;
    if (args.contains("seed")) seed = static_cast<std::uint64_t>(int_arg(args, "seed"));
    return SchedulerMode::random(seed);
  }
  throw Error("bad-args", "mode must be \"det\" or \"rand\"");
}

// {"path": ...} or {"source": ...} under the given key prefix.
std::optional<std::string> text_arg(const json& args, const std::string& path_key, const std::string& source_key) {
  if (args.contains(source_key)) {
    if (!args[source_key].is_string()) throw Error("bad-args", source_key + " must be a string");
    return args[source_key].get<std::string>();
  }
  if (args.contains(path_key)) {
    if (!args[path_key].is_string()) throw Error("bad-args", path_key + " must be a string");
    return read_text_file(args[path_key].get<std::string>());
  }
  return std::nullopt;
}

}  // namespace

json to_json(const StopReason& stop, const Program& program) {
  json j = {{"kind", to_string(stop.kind)},
            {"tid", stop.tid},
            {"focus", stop.focus},
            {"focus_switched", stop.focus_switched},
            {"snapshot", snapshot_json(stop.snapshot, program)}};
  if (stop.kind == StopKind::BreakpointHit) j["breakpoint"] = stop.breakpoint_id;
  if (stop.trap) j["trap"] = to_string(*stop.trap);
  return j;
}

json threads_json(const Debugger& d) { return snapshot_json(d.snapshot(), d.program()); }

json pending_json(const Debugger& d) {
  auto pending = d.pending();
  std::sort(pending.begin(), pending.end(),
            [](const PendingSync& a, const PendingSync& b) { return std::tie(a.time, a.tid) < std::tie(b.time, b.tid); });
  json out = json::array();
  for (const auto& p : pending) out.push_back(to_json(p));
  return out;
}

void ProtocolSession::open(std::string program_text, std::string model_text, SchedulerMode mode) {
  auto next = std::make_unique<Debugger>(program_text, model_text, mode);
  debugger_ = std::move(next);
  program_text_ = std::move(program_text);
  model_text_ = std::move(model_text);
}

Debugger& ProtocolSession::require_session() {
  if (!debugger_) throw Error("no-session", "no program loaded");
  return *debugger_;
}

json ProtocolSession::handle(const json& request) {
  json response = {{"id", nullptr}, {"ok", false}};
  if (!request.is_object()) {
    response["error"] = {{"code", "parse"}, {"message", "request must be a JSON object"}};
    return response;
  }
  if (request.contains("id")) response["id"] = request["id"];
  if (!request.contains("cmd") || !request["cmd"].is_string()) {
    response["error"] = {{"code", "bad-request"}, {"message", "request has no \"cmd\" string"}};
    return response;
  }
  json args = request.value("args", json::object());
  if (!args.is_object()) {
    response["error"] = {{"code", "bad-args"}, {"message", "\"args\" must be an object"}};
    return response;
  }
  try {
    json result = dispatch(request["cmd"].get<std::string>(), args, response);
    response["ok"] = true;
    response["result"] = std::move(result);
  } catch (const Error& e) {
    response.erase("stop");
    response["error"] = {{"code", e.code()}, {"message", e.what()}};
  } catch (const json::exception& e) {
    response.erase("stop");
    response["error"] = {{"code", "bad-args"}, {"message", e.what()}};
  }
  return response;
}

std::string ProtocolSession::handle_line(std::string_view line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::parse_error& e) {
    json response = {{"id", nullptr}, {"ok", false}, {"error", {{"code", "parse"}, {"message", e.what()}}}};
    return response.dump();
  }
  return handle(request).dump();
}

json ProtocolSession::dispatch(const std::string& cmd, const json& args, json& response) {
  auto stopped = [&](const StopReason& stop) {
    response["stop"] = to_json(stop, debugger_->program());
    return json::object();
  };

  if (cmd == "load") {
    auto program = text_arg(args, "program", "source");
    if (!program) throw Error("bad-args", "load needs \"program\" (path) or \"source\" (text)");
    auto model = text_arg(args, "model", "model_source").value_or("");
    auto mode = args.contains("mode") ? mode_arg(args) : SchedulerMode::deterministic();
    open(std::move(*program), std::move(model), mode);
    const auto& p = debugger_->program();
    return {{"instructions", p.instructions.size()},
            {"globals", p.globals_size},
            {"locks", p.locks_count},
            {"threads", debugger_->machine().threads().size()}};
  }
  if (cmd == "quit") {
    closed_ = true;
    return json::object();
  }
  if (cmd == "model") {
    require_session();
    auto model = text_arg(args, "path", "source");
    if (!model) throw Error("bad-args", "model needs \"path\" or \"source\"");
    open(program_text_, std::move(*model), debugger_->mode());
    return json::object();
  }
  if (cmd == "mode") {
    require_session();
    open(program_text_, model_text_, mode_arg(args));
    return json::object();
  }

  static const char* const kKnown[] = {"run",     "continue",  "step",     "syncstep",  "break-add",
                                       "break-del", "threads", "pending",  "read-reg",  "write-reg",
                                       "read-glob", "write-glob", "set-time", "trace",  "replay",
                                       "reset",   "log"};
  if (std::find(std::begin(kKnown), std::end(kKnown), cmd) == std::end(kKnown))
    throw Error("unknown-cmd", "unknown command \"" + cmd + "\"");

  auto& d = require_session();
  if (cmd == "run") {
    d.reset();
    return stopped(d.cont());
  }
  if (cmd == "continue") return stopped(d.cont());
  if (cmd == "step") return stopped(d.step());
  if (cmd == "syncstep") return stopped(d.sync_step());
  if (cmd == "break-add") {
    std::optional<Tid> filter;
    if (args.contains("tid") && !args["tid"].is_null()) filter = tid_arg(args);
    const auto& bp = d.add_breakpoint(string_arg(args, "location"), filter);
    return {{"id", bp.id}, {"pc", bp.location}, {"location", d.program().location_name(bp.location)}};
  }
  if (cmd == "break-del") {
    d.remove_breakpoint(static_cast<int>(int_arg(args, "id")));
    return json::object();
  }
  if (cmd == "threads") return {{"focus", d.focus()}, {"threads", threads_json(d)}};
  if (cmd == "pending") return {{"pending", pending_json(d)}};
  if (cmd == "read-reg") return {{"value", d.read(Selector::reg(tid_arg(args), int_arg(args, "reg")))}};
  if (cmd == "write-reg") {
    d.write(Selector::reg(tid_arg(args), int_arg(args, "reg")), int_arg(args, "value"));
    return json::object();
  }
  if (cmd == "read-glob") return {{"value", d.read(Selector::global(int_arg(args, "index")))}};
  if (cmd == "write-glob") {
    d.write(Selector::global(int_arg(args, "index")), int_arg(args, "value"));
    return json::object();
  }
  if (cmd == "set-time") {
    std::optional<std::uint32_t> pc;
    if (args.contains("pc") && !args["pc"].is_null()) pc = static_cast<std::uint32_t>(int_arg(args, "pc"));
    auto t = int_arg(args, "time");
    if (t < 0) throw Error("bad-args", "time must be non-negative");
    auto o = d.set_time(tid_arg(args), static_cast<Cycles>(t), pc);
    return {{"tid", o.tid},
            {"pc", o.pc},
            {"old_time", o.old_time},
            {"new_time", o.new_time},
            {"delta", o.delta()},
            {"pending", pending_json(d)}};
  }
  if (cmd == "trace") {
    json events = json::array();
    for (const auto& e : d.trace().events) events.push_back(to_json(e, d.program()));
    return {{"events", events}, {"watermark", d.trace().watermark}, {"text", export_trace(d.trace(), d.program())}};
  }
  if (cmd == "replay") {
    SessionLog log = d.log();
    auto text = text_arg(args, "path", "log");
    if (text) log = SessionLog::parse(*text);
    Trace replayed = replay(log, program_text_, model_text_);
    json events = json::array();
    for (const auto& e : replayed.events) events.push_back(to_json(e, d.program()));
    json result = {{"events", events}, {"text", export_trace(replayed, d.program())}};
    if (!text) result["matches"] = replayed == d.trace();
    return result;
  }
  if (cmd == "log") return {{"text", d.log().serialize()}};
  // reset
  d.reset();
  return json::object();
}

}  // namespace tadb
