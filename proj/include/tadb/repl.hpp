#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include "tadb/debugger.hpp"

namespace tadb {

// GDB-style line commands over a Debugger. Output is plain text and stable
// enough to diff against golden transcripts.
class Repl {
 public:
  explicit Repl(std::ostream& out) : out_(out) {}

  void open(std::string program_text, std::string model_text, SchedulerMode mode);
  // Executes one command line; false once the user quits.
  bool execute(std::string_view line);
  // Reads commands until EOF or quit. With `echo`, each command is written
  // back after the prompt (script transcripts); otherwise a bare prompt is shown.
  void run(std::istream& in, bool echo);

  Debugger* debugger() { return debugger_.get(); }

 private:
  void dispatch(const std::string& cmd, std::string_view rest);
  Debugger& session();
  void print_stop(const StopReason& stop);
  void print_thread_line(const ThreadSnapshot& t);
  void print_threads();
  void print_pending();
  void print_trace(const Trace& trace);
  void print_help();

  std::ostream& out_;
  std::unique_ptr<Debugger> debugger_;
  std::string program_text_;
  std::string model_text_;
};

}  // namespace tadb
