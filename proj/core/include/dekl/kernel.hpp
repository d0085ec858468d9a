#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dekl/module.hpp"
#include "dekl/source.hpp"
#include "dekl/term.hpp"
#include "dekl/transition.hpp"

namespace dekl {

enum class TypeErrorKind {
  UnboundVariable,
  UniverseMismatch,
  NotAFunction,
  ConversionFailure,
  EndpointMismatch,
  IllFormedContext,
  UnguardedCorecursion,
  MotiveMismatch,
  CannotInfer,  // a bare lambda in a synthesizing position
};

std::string_view to_string(TypeErrorKind k);

class TypeError : public std::runtime_error {
 public:
  TypeError(TypeErrorKind kind, const std::string& message, SourceSpan span = {});

  TypeErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  void set_span(SourceSpan span) { span_ = std::move(span); }

  // ConversionFailure: both sides in normal form.
  TermPtr expected;
  TermPtr actual;
  // EndpointMismatch: the state names (printed terms when not constants).
  std::string expected_state;
  std::string actual_state;

 private:
  TypeErrorKind kind_;
  SourceSpan span_;
};

struct NormalForm {
  TermPtr term;
  bool is_canonical = false;  // head is a constructor, type former or constant
};

/// Global constants visible to the kernel.
struct Signature {
  std::shared_ptr<const TransitionSystem> system = std::make_shared<TransitionSystem>();
  std::set<std::string, std::less<>> corecs;
};

inline constexpr std::size_t kDefaultFuel = 1'000'000;

/// Typing, conversion and normalization. Stateless apart from the signature,
/// so one instance may serve any number of threads.
class Kernel {
 public:
  explicit Kernel(Signature sig = {}, std::size_t fuel = kDefaultFuel);

  const Signature& signature() const { return sig_; }
  const TransitionSystem& system() const { return *sig_.system; }

  void check_context(const Context& ctx) const;
  TermPtr infer(const Context& ctx, const TermPtr& t) const;
  void check(const Context& ctx, const TermPtr& t, const TermPtr& type) const;
  bool conv(const Context& ctx, const TermPtr& a, const TermPtr& b) const;

  NormalForm normalize(const Context& ctx, const TermPtr& t) const;
  TermPtr nf(const TermPtr& t) const;
  TermPtr whnf(const TermPtr& t) const;

  /// One leftmost-outermost contraction, or nullopt when `t` is normal.
  std::optional<TermPtr> reduce_step(const TermPtr& t) const;

  /// True iff `t` infers a type convertible with `type`; never throws TypeError.
  bool accepts(const Context& ctx, const TermPtr& t, const TermPtr& type) const;

 private:
  struct Fuel {
    std::size_t left;
    void burn();
  };

  TermPtr whnf_fuel(const TermPtr& t, Fuel& fuel) const;
  TermPtr nf_fuel(const TermPtr& t, Fuel& fuel) const;
  std::optional<TermPtr> contract_elim(const node::TraceElim& el, const TermPtr& scrutinee,
                                       const TermPtr& witness) const;

  TermPtr infer_universe(const Context& ctx, const TermPtr& t) const;
  TermPtr infer_spine(const Context& ctx, const TermPtr& lam, const std::vector<TermPtr>& args) const;
  void check_spine(const Context& ctx, const TermPtr& lam, const std::vector<TermPtr>& args,
                   const TermPtr& type) const;
  static TermPtr instantiate_spine(const TermPtr& lam, const std::vector<TermPtr>& args);
  TermPtr infer_elim(const Context& ctx, const node::TraceElim& el) const;
  void check_motive(const Context& ctx, const TermPtr& motive, const TermPtr& src) const;
  std::string state_name(const TermPtr& s) const;

  Signature sig_;
  std::size_t fuel_;
};

/// Expected type of a trace_elim step case for motive `motive` over traces from `src`:
/// (s1 : State) (t : FinTrace(src, s1)) (e : Event) (s2 : State) (p : Step(s1, e, s2))
///   (ih : motive s1 t) -> motive s2 (step(t, e, p))
TermPtr trace_elim_step_type(const TermPtr& motive, const TermPtr& src);

/// True when the head of `t` is a constructor, constant or type former.
bool is_canonical_head(const TermPtr& t);

// --- modules -----------------------------------------------------------------

struct CheckedDef {
  std::string name;
  TermPtr type;
  TermPtr body;
  TermPtr normal_body;
};

/// Result of checking a whole module. Immutable and shareable.
struct CheckedModule {
  std::shared_ptr<const ModuleAST> module;
  std::shared_ptr<const TransitionSystem> system;
  Signature signature;
  std::vector<CheckedDef> defs;
};

/// Syntactic guard: the head is present, neither the head nor the tail event
/// mentions a corecursive name, and the tail names a declared corec.
void check_guardedness(const CorecDecl& d, const std::set<std::string, std::less<>>& corecs);

/// Validates the transition system (SemanticError) and type-checks every
/// declaration (TypeError carrying the declaration's span).
CheckedModule check_module(const ModuleAST& m);

/// The signature of `m` without checking anything.
Signature module_signature(const ModuleAST& m);

struct Observation {
  std::vector<std::pair<std::string, std::string>> steps;  // (state, event)
  std::string final_state;

  /// [s0, e0, s1, e1, ..., final]
  std::vector<std::string> flatten() const;
};

/// Unfolds `name` by head/tail `depth` times. Throws SemanticError for an
/// unknown name and TypeError when any corec of the module is unguarded.
Observation observe_inftrace(const ModuleAST& m, std::string_view name, std::size_t depth);

}  // namespace dekl
