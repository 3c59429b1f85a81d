#pragma once

#include <stdexcept>
#include <string>

namespace bts {

/// Error with a 1-based position into the offending input text.
struct TextError : std::runtime_error {
  int line;
  int column;

  TextError(int l, int c, const std::string& msg)
      : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

}  // namespace bts
