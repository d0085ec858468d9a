#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dekl/module.hpp"
#include "dekl/presheaf.hpp"
#include "dekl/source.hpp"
#include "dekl/term.hpp"

namespace dekl {

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceSpan span, std::vector<std::string> expected, std::string found, const std::string& message);

  const SourceSpan& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

  /// "file:line:col: message"
  std::string format() const;

 private:
  SourceSpan span_;
  std::vector<std::string> expected_;
  std::string found_;
};

/// Global names in scope while parsing terms.
struct NameTable {
  std::set<std::string, std::less<>> states;
  std::set<std::string, std::less<>> events;
  std::set<std::string, std::less<>> witnesses;
  std::set<std::string, std::less<>> corecs;
  std::map<std::string, TermPtr, std::less<>> defs;  // closed bodies, inlined at use sites
  std::map<std::string, PolicyPtr, std::less<>> policies;
  std::set<std::string, std::less<>> presheaves;

  bool declared(std::string_view name) const;
  /// Every declared name, for the printer's reserved set.
  std::set<std::string> all() const;
};

ModuleAST parse_module(std::string_view text, const std::string& file = "<input>");

/// Names declared by a parsed module.
NameTable names_of(const ModuleAST& m);

/// Parses a single term. `locals` are bound variable names, outermost first.
TermPtr parse_term(std::string_view text, const NameTable& names, const std::vector<std::string>& locals = {});

}  // namespace dekl
