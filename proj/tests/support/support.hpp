#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dekl/kernel.hpp"
#include "dekl/parser.hpp"
#include "dekl/term.hpp"

namespace dekl::testing {

inline std::string corpus_path(const std::string& name) { return std::string(DEKL_CORPUS_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ModuleAST load(const std::string& name) { return parse_module(read_text(corpus_path(name)), name); }

inline const std::vector<std::string>& corpus_files() {
  static const std::vector<std::string> files = {"credential.dekl", "monitoring.dekl", "defaults.dekl"};
  return files;
}

inline TermPtr S(const std::string& n) { return mk::state(n); }
inline TermPtr E(const std::string& n) { return mk::event(n); }
inline TermPtr W(const std::string& n) { return mk::witness(n); }

/// Raw (untyped) term with free variables below `depth`.
inline TermPtr random_term(std::mt19937_64& rng, std::size_t depth, std::size_t budget) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  if (budget <= 1) {
    switch (pick(depth > 0 ? 5 : 4)) {
      case 0: return mk::zero();
      case 1: return mk::state_ty();
      case 2: return mk::state("S" + std::to_string(pick(3)));
      case 3: return mk::nat_ty();
      default: return mk::var(pick(depth));
    }
  }
  std::size_t b = budget - 1;
  auto half = [&] { return 1 + pick(std::max<std::size_t>(1, b - 1)); };
  switch (pick(depth > 0 ? 8 : 7)) {
    case 0: return mk::lam(random_term(rng, depth + 1, b), "x");
    case 1: {
      std::size_t l = half();
      return mk::pi(random_term(rng, depth, l), random_term(rng, depth + 1, b > l ? b - l : 1), "y");
    }
    case 2: {
      std::size_t l = half();
      return mk::app(random_term(rng, depth, l), random_term(rng, depth, b > l ? b - l : 1));
    }
    case 3: return mk::succ(random_term(rng, depth, b));
    case 4: return mk::nil(random_term(rng, depth, b));
    case 5: {
      std::size_t l = half();
      return mk::step(random_term(rng, depth, l), mk::event("E"), random_term(rng, depth, b > l ? b - l : 1));
    }
    case 6: {
      std::size_t l = half();
      return mk::fin_trace(random_term(rng, depth, l), random_term(rng, depth, b > l ? b - l : 1));
    }
    default: return mk::var(pick(depth));
  }
}

}  // namespace dekl::testing
