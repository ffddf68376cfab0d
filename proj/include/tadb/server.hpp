#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>

#include "tadb/protocol.hpp"

namespace tadb {

// All connections share one engine lock, so requests never run concurrently.
std::mutex& engine_mutex();

using SessionFactory = std::function<std::unique_ptr<ProtocolSession>()>;

// JSON lines over a stream pair, until EOF or a quit request.
void serve_stream(std::istream& in, std::ostream& out, ProtocolSession& session);

// Loopback listener; one ProtocolSession per accepted connection. TCP carries
// LF-terminated JSON lines; WebSocket carries one or more lines per text
// message and answers each request with its own message.
class Server {
 public:
  enum class Transport { Tcp, WebSocket };

  Server(Transport transport, SessionFactory factory);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Port 0 binds an ephemeral port; returns the bound port.
  std::uint16_t start(std::uint16_t port);
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "stdio", "tcp:<port>" or "ws:<port>". Returns a process exit status.
int serve(const std::string& spec, const SessionFactory& factory, std::istream& in, std::ostream& out,
          std::ostream& err);

}  // namespace tadb
