#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dekl/kernel.hpp"
#include "dekl/term.hpp"

namespace dekl {

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t maxTermSize = 25;
  std::size_t maxCtxLen = 4;
  std::size_t iterations = 1000;

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

/// A generated judgment ctx |- term : type, with `type` in normal form.
struct Sample {
  Context ctx;
  TermPtr term;
  TermPtr type;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxGenAttempts = 10'000;

/// States S0..S2, events Issue/Use/Revoke and steps issue0, use1, revoke1:
/// the fixed signature of the metatheory suites and the consistency search.
Signature credential_signature();

/// Typing-rule-directed random generation. Every sample is determined by
/// (config, iteration index) alone.
///
/// Generated contexts hold only first-order types (base types and functions
/// from base types), and lambdas are only applied to arguments of base type.
/// Within that fragment unannotated lambdas never land in a synthesizing
/// position under substitution or reduction.
class Generator {
 public:
  Generator(const Kernel& kernel, GenConfig cfg);

  /// Any well-typed judgment.
  Sample generate(std::size_t iteration, std::size_t min_ctx = 0) const;
  /// A closed term of type Nat or FinTrace(σ, σ').
  Sample generate_closed_base(std::size_t iteration) const;

  /// A term of `type` in `ctx` within `budget` nodes, or nullopt when the
  /// attempt dead-ends. Deterministic in `rng`.
  std::optional<TermPtr> term_of(std::mt19937_64& rng, const Context& ctx, const TermPtr& type,
                                 std::size_t budget) const;
  /// A first-order context-entry type well-formed in `ctx`.
  TermPtr entry_type(std::mt19937_64& rng, const Context& ctx) const;

  std::mt19937_64 rng_for(std::size_t iteration, std::uint64_t salt = 0) const;

 private:
  const Kernel& k_;
  GenConfig cfg_;
};

struct Counterexample {
  std::size_t offset;  // iteration index relative to the seed
  std::string text;
};

struct PropertyReport {
  std::string name;
  std::size_t iterations = 0;
  std::vector<Counterexample> failures;

  bool ok() const { return failures.empty(); }
};

/// "h0 : Nat, h1 : State |- t : A"
std::string format_judgment(const Context& ctx, const TermPtr& t, const TermPtr& type);

PropertyReport run_weakening(const Kernel& k, const GenConfig& cfg);
PropertyReport run_substitution(const Kernel& k, const GenConfig& cfg);
PropertyReport run_subject_reduction(const Kernel& k, const GenConfig& cfg);
PropertyReport run_canonicity(const Kernel& k, const GenConfig& cfg);

/// Weakening, substitution, subject reduction and canonicity, in that order.
std::vector<PropertyReport> run_structural_suite(const Kernel& k, const GenConfig& cfg);

/// Leftmost-outermost reduction sequence starting after `t` (at most `limit` steps).
std::vector<TermPtr> reduce_chain(const Kernel& k, const TermPtr& t, std::size_t limit = 10'000);

/// Closed normal form is canonical: Nat values are zero/succ towers, traces
/// are nil/step chains over constants.
bool is_canonical_value(const TermPtr& t);

// --- bounded consistency ------------------------------------------------------

/// Closed leaves of the search: universes Uc(0), Type(0), Prop, the base types,
/// bot, zero and every state, event, witness and corec of the signature.
std::vector<TermPtr> search_alphabet(const Signature& sig);

/// Exhaustive type-directed enumeration of terms by exact AST size. Mirrors the
/// kernel's syntax-directed rules, so the enumerated sets are exactly the terms
/// the kernel accepts. Memoized; not thread-safe.
class TermEnumerator {
 public:
  explicit TermEnumerator(const Kernel& k);
  ~TermEnumerator();
  TermEnumerator(const TermEnumerator&) = delete;
  TermEnumerator& operator=(const TermEnumerator&) = delete;

  /// Terms of size `n` that infer in `ctx`.
  std::vector<TermPtr> inferable(const Context& ctx, std::size_t n);
  /// Terms of size `n` that check against `type` in `ctx`.
  std::vector<TermPtr> checkable(const Context& ctx, const TermPtr& type, std::size_t n);

  std::size_t memo_entries() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr std::size_t kMaxSearchSize = 12;

/// The smallest closed term checking against `target` with at most `max_size`
/// nodes, or nullopt. Throws std::invalid_argument when max_size > 12.
std::optional<TermPtr> consistency_search(const Kernel& k, std::size_t max_size, const TermPtr& target);

/// Every raw closed term of exactly `size` nodes over the alphabet, bound
/// variables included. Independent of typing; used as an oracle.
std::vector<TermPtr> enumerate_raw(const std::vector<TermPtr>& alphabet, std::size_t size);

}  // namespace dekl
