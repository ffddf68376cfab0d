#pragma once

#include <stdexcept>
#include <string>

namespace tadb {

// Every failure surfaced by the engine carries a short machine-readable code
// (used verbatim as the protocol error code) plus a human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  ParseError(std::string code, int line, std::string token, const std::string& message)
      : Error(std::move(code), "line " + std::to_string(line) + ": " + message +
                            (token.empty() ? "" : " \"" + token + "\"")),
        line_(line),
        token_(std::move(token)) {}

  int line() const noexcept { return line_; }
  const std::string& token() const noexcept { return token_; }

 private:
  int line_;
  std::string token_;
};

}  // namespace tadb
