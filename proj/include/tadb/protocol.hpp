#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tadb/debugger.hpp"

namespace tadb {

// JSON renderings shared by the wire protocol and the session log.
nlohmann::json to_json(const StopReason& stop, const Program& program);
nlohmann::json to_json(const PendingSync& pending);
nlohmann::json to_json(const SyncEvent& event, const Program& program);
nlohmann::json threads_json(const Debugger& debugger);
nlohmann::json pending_json(const Debugger& debugger);

std::string read_text_file(const std::string& path);

// One protocol connection: a request object in, exactly one response out.
// Owns at most one debug session.
class ProtocolSession {
 public:
  nlohmann::json handle(const nlohmann::json& request);
  // Parses one request line; malformed JSON yields a "parse" error response.
  std::string handle_line(std::string_view line);

  // Starts a session directly, as a "load" request would.
  void open(std::string program_text, std::string model_text, SchedulerMode mode);

  bool closed() const { return closed_; }
  Debugger* debugger() { return debugger_.get(); }

 private:
  nlohmann::json dispatch(const std::string& cmd, const nlohmann::json& args, nlohmann::json& response);
  Debugger& require_session();

  std::unique_ptr<Debugger> debugger_;
  std::string program_text_;
  std::string model_text_;
  bool closed_ = false;
};

}  // namespace tadb
