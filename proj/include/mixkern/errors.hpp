#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mixkern {

/// Exception carrying a short machine-readable code alongside the message.
/// The CLI prints failures as `error: <code>: <message>` and maps the code
/// to its exit status, so codes are part of the public surface.
class error : public std::runtime_error {
 public:
  error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void raise(const std::string& code, const std::string& message) {
  throw error(code, message);
}

}  // namespace mixkern
