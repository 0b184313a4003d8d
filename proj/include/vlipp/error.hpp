#pragma once

#include <stdexcept>
#include <string>

namespace vlipp {

// Broad failure classes; the CLI maps each to an exit code.
enum class ErrorKind {
  precondition,
  validation,
  network,
  format,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error precondition_error(const std::string& what) { return {ErrorKind::precondition, what}; }
inline Error validation_error(const std::string& what) { return {ErrorKind::validation, what}; }
inline Error network_error(const std::string& what) { return {ErrorKind::network, what}; }
inline Error format_error(const std::string& what) { return {ErrorKind::format, what}; }
inline Error io_error(const std::string& what) { return {ErrorKind::io, what}; }

}  // namespace vlipp
