#pragma once

#include <stdexcept>
#include <string>

namespace dekl {

/// A rejected semantic object: an invalid transition system, path operation,
/// presheaf construction or analysis request.
class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An invariant the implementation itself is responsible for has been broken
/// (e.g. normalization fuel exhausted on a well-typed term).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dekl
