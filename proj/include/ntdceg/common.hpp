#pragma once

#include <stdexcept>
#include <string>

namespace ntdceg {

// Library-level failure (precondition violation, inconsistent model, ...).
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A located message produced by the spec parser and the validators.
struct Diagnostic {
  int line = 0;
  int col = 0;
  std::string message;

  std::string str() const {
    if (line <= 0) return message;
    return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
  }
};

}  // namespace ntdceg
