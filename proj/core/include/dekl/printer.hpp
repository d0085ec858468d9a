#pragma once

#include <set>
#include <string>
#include <vector>

#include "dekl/term.hpp"

namespace dekl {

/// Renders `t` in the surface syntax. `names` are the context's variable
/// names, outermost first, and must be distinct. Binders get fresh names that
/// avoid every name in scope, every keyword and every name in `reserved`, so
/// parsing the result under the same names yields an alpha-equivalent term.
std::string pretty_print(const TermPtr& t, const std::vector<std::string>& names = {},
                         const std::set<std::string>& reserved = {});

std::string pretty_print(const TermPtr& t, const Context& ctx, const std::set<std::string>& reserved = {});

/// Reserved words of the surface language.
bool is_keyword(const std::string& word);

}  // namespace dekl
