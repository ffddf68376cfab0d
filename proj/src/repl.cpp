#include "tadb/repl.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <vector>

#include "tadb/error.hpp"
#include "tadb/protocol.hpp"

namespace tadb {

namespace {

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw Error("bad-args", "expected an integer, got \"" + std::string(text) + "\"");
  return v;
}

Tid parse_tid(std::string_view text) {
  if (!text.empty() && text[0] == 't') text.remove_prefix(1);
  auto v = parse_int(text);
  if (v < 0) throw Error("bad-args", "thread ids are non-negative");
  return static_cast<Tid>(v);
}

// "r3" (focus thread), "t1.r3", "g[4]".
Selector parse_selector(std::string_view text, Tid focus) {
  text = trim(text);
  if (text.size() > 3 && text[0] == 'g' && text[1] == '[' && text.back() == ']')
    return Selector::global(parse_int(text.substr(2, text.size() - 3)));
  Tid tid = focus;
  if (!text.empty() && text[0] == 't') {
    auto dot = text.find('.');
    if (dot == std::string_view::npos) throw Error("bad-args", "bad selector \"" + std::string(text) + "\"");
    tid = parse_tid(text.substr(0, dot));
    text.remove_prefix(dot + 1);
  }
  if (text.size() < 2 || text[0] != 'r') throw Error("bad-args", "bad selector \"" + std::string(text) + "\"");
  return Selector::reg(tid, parse_int(text.substr(1)));
}

std::string selector_name(const Selector& s) {
  if (s.kind == SelectorKind::Global) return "g[" + std::to_string(s.index) + "]";
  return "t" + std::to_string(s.tid) + ".r" + std::to_string(s.index);
}

std::string where(const Program& program, std::uint32_t pc) {
  return program.location_name(pc) + " (pc " + std::to_string(pc) + ")";
}

std::string addr_text(SyncKind kind, std::int64_t target, const Program& program) {
  if (kind == SyncKind::Spawn) return program.location_name(static_cast<std::uint32_t>(target));
  return std::to_string(target);
}

}  // namespace

void Repl::open(std::string program_text, std::string model_text, SchedulerMode mode) {
  debugger_ = std::make_unique<Debugger>(program_text, model_text, mode);
  program_text_ = std::move(program_text);
  model_text_ = std::move(model_text);
}

Debugger& Repl::session() {
  if (!debugger_) throw Error("no-session", "no program loaded; use \"load <program> [model]\"");
  return *debugger_;
}

void Repl::run(std::istream& in, bool echo) {
  std::string line;
  for (;;) {
    out_ << "(tadb) ";
    if (!std::getline(in, line)) {
      out_ << "\n";
      return;
    }
    if (echo) out_ << line << "\n";
    out_.flush();
    if (!execute(line)) return;
  }
}

bool Repl::execute(std::string_view line) {
  line = trim(line);
  if (line.empty() || line[0] == '#') return true;
  auto space = line.find_first_of(" \t");
  std::string cmd(line.substr(0, space));
  std::string_view rest = space == std::string_view::npos ? std::string_view{} : trim(line.substr(space));
  if (cmd == "quit" || cmd == "q") return false;
  try {
    dispatch(cmd, rest);
  } catch (const Error& e) {
    out_ << "Error: " << e.what() << "\n";
  }
  out_.flush();
  return true;
}

void Repl::dispatch(const std::string& cmd, std::string_view rest) {
  auto args = words(rest);

  if (cmd == "help" || cmd == "h") return print_help();
  if (cmd == "load") {
    if (args.empty() || args.size() > 2) throw Error("bad-args", "usage: load <program> [model]");
    open(read_text_file(args[0]), args.size() > 1 ? read_text_file(args[1]) : "", SchedulerMode::deterministic());
    out_ << "Loaded " << args[0] << ": " << debugger_->program().instructions.size() << " instructions\n";
    return;
  }
  if (cmd == "break" || cmd == "b") {
    if (args.size() != 1 && !(args.size() == 3 && args[1] == "thread"))
      throw Error("bad-args", "usage: break <location> [thread <tid>]");
    std::optional<Tid> filter;
    if (args.size() == 3) filter = parse_tid(args[2]);
    const auto& bp = session().add_breakpoint(args[0], filter);
    out_ << "Breakpoint " << bp.id << " at " << debugger_->program().location_name(bp.location);
    if (filter) out_ << " thread " << *filter;
    out_ << "\n";
    return;
  }
  if (cmd == "delete" || cmd == "d") {
    if (args.size() != 1) throw Error("bad-args", "usage: delete <breakpoint id>");
    auto id = static_cast<int>(parse_int(args[0]));
    session().remove_breakpoint(id);
    out_ << "Deleted breakpoint " << id << "\n";
    return;
  }
  if (cmd == "continue" || cmd == "c") return print_stop(session().cont());
  if (cmd == "step" || cmd == "s") return print_stop(session().step());
  if (cmd == "syncstep" || cmd == "ss") return print_stop(session().sync_step());
  if (cmd == "run" || cmd == "r") {
    session().reset();
    return print_stop(debugger_->cont());
  }
  if (cmd == "reset") {
    session().reset();
    out_ << "Session reset; breakpoints kept.\n";
    return;
  }
  if (cmd == "info" || cmd == "i") {
    std::string what = args.empty() ? "" : args[0];
    if (what == "threads") return print_threads();
    if (what == "pending") return print_pending();
    if (what == "breakpoints" || what == "break") {
      auto& d = session();
      if (d.breakpoints().empty()) out_ << "No breakpoints.\n";
      for (const auto& bp : d.breakpoints()) {
        out_ << "  " << bp.id << "  " << where(d.program(), bp.location);
        if (bp.thread_filter) out_ << " thread " << *bp.thread_filter;
        out_ << "\n";
      }
      return;
    }
    throw Error("bad-args", "usage: info threads|pending|breakpoints");
  }
  if (cmd == "print" || cmd == "p") {
    if (rest.empty()) throw Error("bad-args", "usage: print r<N> | t<T>.r<N> | g[<N>]");
    auto sel = parse_selector(rest, session().focus());
    out_ << selector_name(sel) << " = " << debugger_->read(sel) << "\n";
    return;
  }
  if (cmd == "set") {
    if (!args.empty() && args[0] == "var") {
      auto body = trim(rest.substr(3));
      auto eq = body.find('=');
      if (eq == std::string_view::npos) throw Error("bad-args", "usage: set var <selector> = <value>");
      auto sel = parse_selector(body.substr(0, eq), session().focus());
      auto value = parse_int(trim(body.substr(eq + 1)));
      debugger_->write(sel, value);
      out_ << selector_name(sel) << " = " << value << "\n";
      return;
    }
    if (!args.empty() && args[0] == "time") {
      if (args.size() != 3 && args.size() != 4) throw Error("bad-args", "usage: set time <tid> <time> [pc]");
      auto t = parse_int(args[2]);
      if (t < 0) throw Error("bad-args", "time must be non-negative");
      std::optional<std::uint32_t> pc;
      if (args.size() == 4) pc = static_cast<std::uint32_t>(parse_int(args[3]));
      auto o = session().set_time(parse_tid(args[1]), static_cast<Cycles>(t), pc);
      char delta[32];
      std::snprintf(delta, sizeof delta, "%+lld", static_cast<long long>(o.delta()));
      out_ << "Thread " << o.tid << " sync at " << where(debugger_->program(), o.pc) << ": time " << o.old_time
           << " -> " << o.new_time << " (" << delta << ")\n";
      print_pending();
      return;
    }
    throw Error("bad-args", "usage: set var <selector> = <value> | set time <tid> <time> [pc]");
  }
  if (cmd == "trace") {
    auto& d = session();
    if (d.trace().events.empty()) out_ << "No sync events committed.\n";
    return print_trace(d.trace());
  }
  if (cmd == "replay") {
    auto& d = session();
    if (args.empty()) {
      Trace t = replay(d.log(), program_text_, model_text_);
      out_ << "Replayed " << d.log().actions.size() << " actions: " << t.events.size() << " sync events, "
           << (t == d.trace() ? "identical to" : "DIFFERENT from") << " the live trace\n";
      return;
    }
    Trace t = replay(SessionLog::parse(read_text_file(args[0])), program_text_, model_text_);
    out_ << "Replayed " << args[0] << ": " << t.events.size() << " sync events\n";
    return print_trace(t);
  }
  if (cmd == "log") {
    auto text = session().log().serialize();
    if (args.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(args[0], std::ios::binary);
    if (!f || !(f << text)) throw Error("io", "cannot write " + args[0]);
    out_ << "Session log written to " << args[0] << " (" << debugger_->log().actions.size() << " actions)\n";
    return;
  }
  if (cmd == "mode") {
    session();
    SchedulerMode mode;
    if (args.size() == 1 && args[0] == "det") {
      mode = SchedulerMode::deterministic();
    } else if ((args.size() == 1 || args.size() == 2) && args[0] == "rand") {
      std::uint64_t seed = args.size() == 2 ? static_cast<std::uint64_t>(parse_int(args[1])) : 0;
      mode = SchedulerMode::random(seed);
    } else {
      throw Error("bad-args", "usage: mode det | mode rand [seed]");
    }
    open(program_text_, model_text_, mode);
    out_ << "New session in " << (mode.kind == SchedulerMode::Kind::Random ? "rand" : "det") << " mode";
    if (mode.kind == SchedulerMode::Kind::Random) out_ << " (seed " << mode.seed << ")";
    out_ << "\n";
    return;
  }
  out_ << "Unknown command \"" << cmd << "\". Try \"help\".\n";
}

void Repl::print_thread_line(const ThreadSnapshot& t) {
  const auto& program = debugger_->program();
  char line[160];
  std::string loc = t.status == ThreadStatus::Finished ? "-" : where(program, t.pc);
  std::string pending = "-";
  if (t.pending) pending = std::string(to_string(t.pending->kind)) + " @" + std::to_string(t.pending->time);
  std::snprintf(line, sizeof line, "%c %-3u %-20s %-20s %-7llu %s\n", t.tid == debugger_->focus() ? '*' : ' ', t.tid,
                std::string(to_string(t.status)).c_str(), loc.c_str(), static_cast<unsigned long long>(t.clock),
                pending.c_str());
  out_ << line;
}

void Repl::print_threads() {
  auto& d = session();
  char head[160];
  std::snprintf(head, sizeof head, "  %-3s %-20s %-20s %-7s %s\n", "Id", "Status", "Location", "Clock", "Pending");
  out_ << head;
  for (const auto& t : d.snapshot()) print_thread_line(t);
}

void Repl::print_pending() {
  auto& d = session();
  auto pending = d.pending();
  std::sort(pending.begin(), pending.end(),
            [](const PendingSync& a, const PendingSync& b) { return std::tie(a.time, a.tid) < std::tie(b.time, b.tid); });
  if (pending.empty()) {
    out_ << "No pending sync points.\n";
    return;
  }
  out_ << "Pending sync points in commit order:\n";
  int n = 1;
  for (const auto& p : pending) {
    out_ << "  " << n++ << ". t" << p.tid << " @" << p.time << " " << to_string(p.kind) << " "
         << addr_text(p.kind, p.target, d.program()) << " at " << where(d.program(), p.pc) << "\n";
  }
}

void Repl::print_trace(const Trace& trace) {
  const auto& program = debugger_->program();
  for (const auto& e : trace.events) {
    char line[160];
    std::snprintf(line, sizeof line, "  #%-3llu t%-2u @%-6llu %-11s %-8s %s\n", static_cast<unsigned long long>(e.seq),
                  e.tid, static_cast<unsigned long long>(e.time), std::string(to_string(e.kind)).c_str(),
                  addr_text(e.kind, e.target, program).c_str(), where(program, e.pc).c_str());
    out_ << line;
  }
}

void Repl::print_stop(const StopReason& stop) {
  const auto& program = debugger_->program();
  const ThreadSnapshot* t = nullptr;
  for (const auto& s : stop.snapshot)
    if (s.tid == stop.tid) t = &s;

  if (stop.focus_switched) out_ << "[Switching focus to thread " << stop.focus << "]\n";
  switch (stop.kind) {
    case StopKind::BreakpointHit:
      out_ << "Breakpoint " << stop.breakpoint_id << ", thread " << stop.tid << " at " << where(program, t->pc)
           << ", clock " << t->clock << "\n";
      break;
    case StopKind::StepComplete:
    case StopKind::SyncStepComplete:
      for (const auto& s : stop.snapshot)
        if (s.tid == stop.focus) t = &s;
      out_ << "Thread " << t->tid << " " << to_string(t->status) << " at " << where(program, t->pc) << ", clock "
           << t->clock;
      if (t->pending) out_ << ", pending " << to_string(t->pending->kind) << " @" << t->pending->time;
      out_ << "\n";
      break;
    case StopKind::Trap:
      out_ << "Thread " << stop.tid << " trapped (" << (stop.trap ? to_string(*stop.trap) : "?") << ") at "
           << where(program, t->pc) << ", clock " << t->clock << "\n";
      break;
    case StopKind::Blocked:
      out_ << "Thread " << stop.tid << " is " << to_string(t->status) << "; it cannot reach another sync point\n";
      break;
    case StopKind::Deadlock:
      out_ << "Deadlock: every live thread is blocked\n";
      break;
    case StopKind::ProgramExit: {
      out_ << "Program exited after " << debugger_->trace().events.size() << " sync events\n";
      for (const auto& o : debugger_->machine().output())
        out_ << "  output t" << o.tid << " @" << o.clock << ": " << o.value << "\n";
      print_trace(debugger_->trace());
      return;
    }
  }
  if (t && t->status != ThreadStatus::Finished && t->pc < program.instructions.size() &&
      stop.kind != StopKind::Deadlock)
    out_ << "  " << t->pc << ":\t" << disassemble(program, t->pc) << "\n";
  print_threads();
}

void Repl::print_help() {
  out_ << "Commands:\n"
          "  load <program> [model]        start a session (mode det)\n"
          "  mode det | mode rand [seed]   restart the session in another scheduling mode\n"
          "  break <loc> [thread <tid>]    loc: label, label+N, @index or source line\n"
          "  delete <id>                   remove a breakpoint\n"
          "  run | continue | step | syncstep\n"
          "  info threads|pending|breakpoints\n"
          "  print r<N> | t<T>.r<N> | g[<N>]\n"
          "  set var <selector> = <value>\n"
          "  set time <tid> <time> [pc]    move a pending sync point\n"
          "  trace                         committed sync events\n"
          "  replay [log]                  re-execute this session (or a saved log)\n"
          "  log [path]                    print or save the session log\n"
          "  reset                         restart, keeping breakpoints\n"
          "  quit\n";
}

}  // namespace tadb
