#include "tadb/server.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <istream>
#include <ostream>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace tadb {

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

std::mutex& engine_mutex() {
  static std::mutex m;
  return m;
}

namespace {

std::string answer(ProtocolSession& session, std::string_view line) {
  std::lock_guard lock(engine_mutex());
  return session.handle_line(line);
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

void serve_tcp_connection(tcp::socket& socket, ProtocolSession& session) {
  asio::streambuf buf;
  boost::system::error_code ec;
  while (!session.closed()) {
    asio::read_until(socket, buf, '\n', ec);
    if (ec) return;
    std::istream in(&buf);
    std::string line;
    std::getline(in, line);
    if (blank(line)) continue;
    auto reply = answer(session, line) + "\n";
    asio::write(socket, asio::buffer(reply), ec);
    if (ec) return;
  }
}

void serve_ws_connection(tcp::socket& socket, ProtocolSession& session) {
  beast::websocket::stream<tcp::socket&> ws(socket);
  boost::system::error_code ec;
  ws.accept(ec);
  if (ec) return;
  ws.text(true);
  while (!session.closed()) {
    beast::flat_buffer buf;
    ws.read(buf, ec);
    if (ec) return;
    std::string message = beast::buffers_to_string(buf.data());
    std::size_t start = 0;
    while (start <= message.size() && !session.closed()) {
      auto end = message.find('\n', start);
      if (end == std::string::npos) end = message.size();
      std::string_view line(message.data() + start, end - start);
      start = end + 1;
      if (blank(line)) continue;
      auto reply = answer(session, line) + "\n";
      ws.write(asio::buffer(reply), ec);
      if (ec) return;
    }
  }
  ws.close(beast::websocket::close_code::normal, ec);
}

}  // namespace

void serve_stream(std::istream& in, std::ostream& out, ProtocolSession& session) {
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (blank(line)) continue;
    out << answer(session, line) << "\n";
    out.flush();
  }
}

struct Server::Impl {
  Transport transport;
  SessionFactory factory;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::thread accept_thread;
  std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopped = false;
  std::vector<std::thread> connections;
  std::vector<int> fds;

  void accept_next() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::lock_guard lock(mu);
      if (stopped) return;
      int fd = socket.native_handle();
      fds.push_back(fd);
      connections.emplace_back([this, fd, s = std::move(socket)]() mutable {
        auto session = factory();
        if (transport == Transport::Tcp)
          serve_tcp_connection(s, *session);
        else
          serve_ws_connection(s, *session);
        boost::system::error_code ignored;
        s.shutdown(tcp::socket::shutdown_both, ignored);
        std::lock_guard lock(mu);
        std::erase(fds, fd);
      });
      accept_next();
    });
  }
};

Server::Server(Transport transport, SessionFactory factory) : impl_(std::make_unique<Impl>()) {
  impl_->transport = transport;
  impl_->factory = std::move(factory);
}

Server::~Server() { stop(); }

std::uint16_t Server::start(std::uint16_t port) {
  tcp::endpoint endpoint(asio::ip::make_address("127.0.0.1"), port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
  impl_->accept_next();
  impl_->accept_thread = std::thread([this] { impl_->io.run(); });
  return impl_->acceptor.local_endpoint().port();
}

void Server::stop() {
  std::vector<std::thread> connections;
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopped) return;
    impl_->stopped = true;
    // Wakes connection threads blocked in a read.
    for (int fd : impl_->fds) ::shutdown(fd, SHUT_RDWR);
    connections.swap(impl_->connections);
  }
  asio::post(impl_->io, [this] {
    boost::system::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  for (auto& t : connections) t.join();
  impl_->stopped_cv.notify_all();
}

void Server::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

int serve(const std::string& spec, const SessionFactory& factory, std::istream& in, std::ostream& out,
          std::ostream& err) {
  if (spec == "stdio") {
    auto session = factory();
    serve_stream(in, out, *session);
    return 0;
  }
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  int port = -1;
  if (colon != std::string::npos) {
    auto digits = std::string_view(spec).substr(colon + 1);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc() || p != digits.data() + digits.size()) port = -1;
  }
  if ((kind != "tcp" && kind != "ws") || port < 0 || port > 65535) {
    err << "--serve expects stdio, tcp:<port> or ws:<port>\n";
    return 2;
  }
  Server server(kind == "tcp" ? Server::Transport::Tcp : Server::Transport::WebSocket, factory);
  std::uint16_t bound = 0;
  try {
    bound = server.start(static_cast<std::uint16_t>(port));
  } catch (const std::exception& e) {
    err << "cannot listen on port " << port << ": " << e.what() << "\n";
    return 1;
  }
  err << "listening on " << kind << "://127.0.0.1:" << bound << "\n";
  err.flush();
  server.wait();
  return 0;
}

}  // namespace tadb
