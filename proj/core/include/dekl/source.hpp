#pragma once

#include <cstddef>
#include <string>

namespace dekl {

/// 1-based, inclusive start and exclusive-by-column end position in a source file.
struct SourceSpan {
  std::string file;
  std::size_t start_line = 1;
  std::size_t start_col = 1;
  std::size_t end_line = 1;
  std::size_t end_col = 1;

  std::string to_string() const { return file + ":" + std::to_string(start_line) + ":" + std::to_string(start_col); }
};

}  // namespace dekl
