#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dekl/transition.hpp"

namespace dekl {

// --- policies ---------------------------------------------------------------

struct PolicyExpr;
using PolicyPtr = std::shared_ptr<const PolicyExpr>;

struct PolicyExpr {
  enum class Kind { Occurs, CountAtLeast, Not, And, Or };

  Kind kind;
  std::string event;      // Occurs, CountAtLeast
  std::size_t count = 0;  // CountAtLeast
  PolicyPtr lhs;          // Not, And, Or
  PolicyPtr rhs;          // And, Or

  static PolicyPtr occurs(std::string event);
  static PolicyPtr count_at_least(std::string event, std::size_t n);
  static PolicyPtr negate(PolicyPtr p);
  static PolicyPtr both(PolicyPtr a, PolicyPtr b);
  static PolicyPtr either(PolicyPtr a, PolicyPtr b);
};

/// Boolean value of the policy on a finite trace; `occurs` matches any edge
/// carrying the event.
bool eval_policy(const TransitionSystem& ts, const PolicyExpr& e, const Path& p);

/// Surface syntax, e.g. "and(occurs(Issue), not occurs(Revoke))".
std::string format_policy(const PolicyExpr& e);

/// Events mentioned by the policy, in first-occurrence order.
std::vector<std::string> policy_events(const PolicyExpr& e);

// --- presheaf specifications -------------------------------------------------

using Witness = std::string;

/// Witness of a subsingleton (predicate) fiber.
inline constexpr std::string_view kPoint = "∗";

/// Fiber over a trace is {∗} when the policy holds and empty otherwise.
struct PredicateSpec {
  std::string name;
  PolicyPtr expr;
};

/// Fiber over τ is every subset of the live issuance records of τ: an edge
/// labelled `issue_event` with no later `revoke_event`. Restriction intersects
/// with the prefix's live records.
struct EvidenceSpec {
  std::string name;
  std::string issue_event;
  std::string revoke_event;
};

/// Fibers and restriction tables given verbatim. Tables for one-step
/// extensions define the presheaf; tables for any other extension (identities,
/// multi-step) are additional claims checked for coherence.
struct TabulatedSpec {
  std::string name;
  std::map<Path, std::vector<Witness>> fibers;
  std::map<ExtensionMorphism, std::map<Witness, Witness>> maps;
};

using PresheafSpec = std::variant<PredicateSpec, TabulatedSpec, EvidenceSpec>;

const std::string& presheaf_name(const PresheafSpec& spec);

// --- finite presheaves -------------------------------------------------------

using RestrictionTable = std::map<Witness, Witness>;

/// Tabulated presheaf over a depth-bounded, prefix-closed base of traces.
/// Only one-step restrictions are stored; composites are computed on demand.
struct FinitePresheaf {
  std::string name;
  std::size_t depth = 0;
  std::shared_ptr<const TransitionSystem> system;

  std::vector<Path> base;                      // enumerate_traces order
  std::vector<std::optional<std::size_t>> parent;  // one-edge-shorter prefix, none for roots
  std::vector<std::vector<Witness>> fibers;
  std::map<Path, std::size_t> index;

  /// step_maps[i]: restriction from fibers[i] to fibers[*parent[i]].
  std::map<std::size_t, RestrictionTable> step_maps;
  /// Declared tables for extensions that are not one step, keyed by (prefix, whole) indices.
  std::map<std::pair<std::size_t, std::size_t>, RestrictionTable> extra_maps;

  std::optional<std::size_t> find(const Path& p) const;
  const std::vector<Witness>& fiber(const Path& p) const;
  bool in_fiber(std::size_t i, const Witness& k) const;
};

/// Builds the finite presheaf over enumerate_traces(ts, roots, depth).
/// Throws SemanticError when a predicate is not prefix-closed (a non-empty
/// fiber over an empty prefix fiber) or an evidence record set is not convex.
FinitePresheaf build_presheaf(const PresheafSpec& spec, std::shared_ptr<const TransitionSystem> ts,
                              const std::vector<std::string>& roots, std::size_t depth);

/// Checks totality of one-step tables, identity tables, and composition
/// coherence on every base triple τ <= τ' <= τ''. Names the first failure.
std::optional<std::string> validate_presheaf(const FinitePresheaf& p);

/// Composite of the one-step tables along `ext`.
Witness restrict(const FinitePresheaf& p, const ExtensionMorphism& ext, const Witness& k);

struct SurjectivityResult {
  bool surjective = true;
  std::vector<Witness> orphans;  // fiber(prefix) minus image, in fiber order
};

SurjectivityResult check_surjective(const FinitePresheaf& p, const ExtensionMorphism& ext);

struct OrphanWitness {
  ExtensionMorphism extension;
  Witness orphan;
};

struct NonMonotonicityReport {
  enum class Verdict { MonotoneOnBase, NonMonotone };

  std::string presheaf;
  std::size_t depth = 0;
  Verdict verdict = Verdict::MonotoneOnBase;
  std::vector<OrphanWitness> witnesses;
  bool prefix_stable = true;
};

std::string_view to_string(NonMonotonicityReport::Verdict v);

/// Checks every one-step extension of the base. Composites of surjections are
/// surjective and a non-surjective composite has a non-surjective factor, so
/// the generators decide the whole base.
NonMonotonicityReport analyze_nonmonotonicity(const FinitePresheaf& p);

/// Witness `k` lives over the first `prefix_len` edges of `path`. Returns the
/// least edge position i > prefix_len (1-based, i.e. prefix length) at which
/// `k` stops being the restriction of anything over the length-i prefix, or
/// nullopt if it survives to the whole path.
std::optional<std::size_t> localize_index_shift(const FinitePresheaf& p, const Path& path, std::size_t prefix_len,
                                                const Witness& k);

/// Live issuance records of a trace, as 1-based edge positions.
std::vector<std::size_t> live_records(const TransitionSystem& ts, const EvidenceSpec& spec, const Path& p);

/// "{rec@1,rec@3}" style name of a record set (records sorted ascending).
Witness format_record_set(const std::vector<std::size_t>& records);

}  // namespace dekl
