#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peelkit {

enum class ErrorKind {
  EmptyMesh,
  EmptyCloud,
  InvalidMesh,
  InvalidArgument,
  DimensionMismatch,
  MissingRgb,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept {
    return kind_;
  }

  // I/O failures and malformed files, as opposed to bad parameters.
  bool is_io() const noexcept {
    return kind_ == ErrorKind::Io || kind_ == ErrorKind::Format;
  }

 private:
  ErrorKind kind_;
};

} // namespace peelkit
