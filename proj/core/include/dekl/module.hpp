#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "dekl/presheaf.hpp"
#include "dekl/source.hpp"
#include "dekl/term.hpp"
#include "dekl/transition.hpp"

namespace dekl {

struct StateDecl {
  std::string name;
  SourceSpan span;
};

struct EventDecl {
  std::string name;
  SourceSpan span;
};

struct StepDecl {
  std::string src;
  std::string event;
  std::string dst;
  std::string witness;
  SourceSpan span;
};

struct DefDecl {
  std::string name;
  TermPtr type;
  TermPtr body;
  SourceSpan span;
};

struct PolicyDecl {
  std::string name;
  PolicyPtr expr;
  SourceSpan span;
};

struct PresheafDecl {
  PresheafSpec spec;
  std::vector<std::string> roots;
  std::size_t depth = 4;
  SourceSpan span;
};

/// `corec name := head H; tail (E, next).` When `head` is null the body was a
/// bare reference to `tail_ref`, which is never guarded.
struct CorecDecl {
  std::string name;
  TermPtr head;
  TermPtr tail_event;
  std::string tail_ref;
  SourceSpan span;
};

using Declaration = std::variant<StateDecl, EventDecl, StepDecl, DefDecl, PolicyDecl, PresheafDecl, CorecDecl>;

struct ModuleAST {
  std::string file;
  std::vector<Declaration> declarations;

  /// States, events and steps in declaration order (not yet validated).
  TransitionSystem system() const;

  std::vector<const CorecDecl*> corecs() const;
  std::vector<const PresheafDecl*> presheaves() const;
  const PresheafDecl* find_presheaf(std::string_view name) const;

  /// Deterministic line-per-declaration serialization.
  std::string serialize() const;
};

}  // namespace dekl
