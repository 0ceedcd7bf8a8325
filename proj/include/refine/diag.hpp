#pragma once

#include <stdexcept>
#include <string>

namespace refine {

struct SourcePos {
  int line = 0;
  int col = 0;
};

// Raised for syntax errors, undeclared identifiers and sort mismatches
// detected while loading programs, triples or proof scripts.
class LoadError : public std::runtime_error {
public:
  LoadError(std::string msg, SourcePos pos)
      : std::runtime_error(format(msg, pos)), pos_(pos) {}
  explicit LoadError(std::string msg) : std::runtime_error(std::move(msg)) {}

  SourcePos pos() const { return pos_; }

private:
  static std::string format(const std::string& msg, SourcePos pos) {
    return msg + " (line " + std::to_string(pos.line) + ", col " +
           std::to_string(pos.col) + ")";
  }
  SourcePos pos_ = {};
};

// Raised when an exhaustive enumeration would exceed the configured cap.
class CapExceeded : public std::runtime_error {
public:
  explicit CapExceeded(std::string msg) : std::runtime_error(std::move(msg)) {}
};

}  // namespace refine
