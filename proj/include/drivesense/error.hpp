#pragma once

#include <stdexcept>
#include <string>

namespace drivesense {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Data,
  Alignment,
  Taxonomy,
  Annotation,
  Feature,
  Assembly,
  Balance,
  Model,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so the C API and CLI can
/// map it onto a status code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace drivesense
