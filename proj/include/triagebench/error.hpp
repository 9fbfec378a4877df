#pragma once

#include <stdexcept>
#include <string>

namespace triagebench {

// Exception with a stable machine-readable code plus a human-readable
// location (file:line, ids, ...). what() renders all parts.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string location, std::string message)
      : std::runtime_error(compose(code, location, message)),
        code_(std::move(code)),
        location_(std::move(location)),
        message_(std::move(message)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& location() const noexcept { return location_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string compose(const std::string& code,
                             const std::string& location,
                             const std::string& message) {
    std::string s = code;
    if (!location.empty()) {
      s += " at ";
      s += location;
    }
    s += ": ";
    s += message;
    return s;
  }

  std::string code_;
  std::string location_;
  std::string message_;
};

}  // namespace triagebench
