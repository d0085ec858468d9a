#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace dekl {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

enum class Layer { Uc, Type, Prop };

// Bound variables are de Bruijn indices; binder names are printing hints only.
namespace node {
struct Var { std::size_t index; };
struct Universe { Layer layer; unsigned level; };
struct Pi { TermPtr domain; TermPtr codomain; std::string binder; };
struct Lam { TermPtr body; std::string binder; };
struct App { TermPtr fn; TermPtr arg; };
struct StateConst { std::string name; };
struct EventConst { std::string name; };
struct StepWitness { std::string name; };
struct Nil { TermPtr state; };
struct Step { TermPtr prefix; TermPtr event; TermPtr witness; };
struct TraceElim { TermPtr motive; TermPtr base; TermPtr step_case; TermPtr scrutinee; };
struct FinTraceTy { TermPtr src; TermPtr dst; };
struct StepTy { TermPtr src; TermPtr event; TermPtr dst; };
struct StateTy {};
struct EventTy {};
struct NatTy {};
struct Zero {};
struct Succ { TermPtr pred; };
struct InfTraceTy {};
struct CorecRef { std::string name; };
struct Bottom {};
}  // namespace node

using Node = std::variant<node::Var, node::Universe, node::Pi, node::Lam, node::App,
                          node::StateConst, node::EventConst, node::StepWitness, node::Nil,
                          node::Step, node::TraceElim, node::FinTraceTy, node::StepTy,
                          node::StateTy, node::EventTy, node::NatTy, node::Zero, node::Succ,
                          node::InfTraceTy, node::CorecRef, node::Bottom>;

struct Term {
  Node node;
  std::size_t size;        // AST node count
  std::size_t free_bound;  // one plus the largest free index, 0 when closed

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
};

TermPtr make(Node n);

namespace mk {
TermPtr var(std::size_t index);
TermPtr uc(unsigned level);
TermPtr type(unsigned level);
TermPtr prop();
TermPtr pi(TermPtr domain, TermPtr codomain, std::string binder = "x");
TermPtr arrow(TermPtr domain, TermPtr codomain);  // codomain is weakened past the binder
TermPtr lam(TermPtr body, std::string binder = "x");
TermPtr app(TermPtr fn, TermPtr arg);
TermPtr apps(TermPtr fn, std::initializer_list<TermPtr> args);
TermPtr state(std::string name);
TermPtr event(std::string name);
TermPtr witness(std::string name);
TermPtr nil(TermPtr state);
TermPtr step(TermPtr prefix, TermPtr event, TermPtr witness);
TermPtr trace_elim(TermPtr motive, TermPtr base, TermPtr step_case, TermPtr scrutinee);
TermPtr fin_trace(TermPtr src, TermPtr dst);
TermPtr step_ty(TermPtr src, TermPtr event, TermPtr dst);
TermPtr state_ty();
TermPtr event_ty();
TermPtr nat_ty();
TermPtr zero();
TermPtr succ(TermPtr pred);
TermPtr nat(unsigned n);
TermPtr inf_trace_ty();
TermPtr corec(std::string name);
TermPtr bottom();
}  // namespace mk

/// Children of a node paired with the number of binders each child sits under
/// relative to the node itself (1 for Pi codomains and Lam bodies, 0 otherwise).
struct Child {
  const TermPtr* term;
  std::size_t binders;
};
std::vector<Child> children(const Term& t);

/// Rebuilds `t` with every child replaced by `f(child, extra_binders)`.
/// Leaves are returned unchanged (same pointer).
template <class F>
TermPtr map_children(const TermPtr& t, F&& f);

/// Adds `delta` to every free variable index >= `cutoff`.
TermPtr shift(const TermPtr& t, std::ptrdiff_t delta, std::size_t cutoff = 0);

/// Makes room for one new binder at position `at` (indices >= at move up by one).
TermPtr weaken(const TermPtr& t, std::size_t at = 0);

/// Instantiates the outermost bound variable of a binder body with `s`:
/// Var(0) becomes `s`, every other free index drops by one.
TermPtr subst(const TermPtr& body, const TermPtr& s);

/// Replaces free variable `index` with `s` and closes the gap. `s` is scoped
/// outside the replaced variable (it cannot see the `index` inner binders).
TermPtr subst_at(const TermPtr& t, std::size_t index, const TermPtr& s);

bool alpha_eq(const TermPtr& a, const TermPtr& b);

/// True iff every free index is below `depth`.
bool scope_valid(const TermPtr& t, std::size_t depth);

/// One plus the largest free index, or 0 for closed terms.
std::size_t free_bound(const TermPtr& t);

bool mentions_var(const TermPtr& t, std::size_t index);
bool mentions_corec(const TermPtr& t);
bool is_closed(const TermPtr& t);

/// Head and arguments of an application spine `f a1 ... an`.
struct Spine {
  TermPtr head;
  std::vector<TermPtr> args;
};
Spine unspine(const TermPtr& t);
TermPtr respine(TermPtr head, const std::vector<TermPtr>& args);

/// Unambiguous S-expression rendering of the raw AST (indices, no names).
std::string dump(const TermPtr& t);

// ---------------------------------------------------------------------------

struct ContextEntry {
  std::string name;
  TermPtr type;
};

/// Typing telescope. Entry i's type is scoped over entries [0, i).
/// Var(0) refers to the last entry.
class Context {
 public:
  Context() = default;
  explicit Context(std::vector<ContextEntry> entries) : entries_(std::move(entries)) {}

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ContextEntry>& entries() const { return entries_; }
  const ContextEntry& entry_for(std::size_t index) const { return entries_[entries_.size() - 1 - index]; }

  /// Type of Var(index), weakened to live in the full context.
  std::optional<TermPtr> lookup(std::size_t index) const;

  Context extended(std::string name, TermPtr type) const;
  void push(std::string name, TermPtr type) { entries_.push_back({std::move(name), std::move(type)}); }
  void pop() { entries_.pop_back(); }
  Context prefix(std::size_t n) const;

  std::vector<std::string> names() const;

 private:
  std::vector<ContextEntry> entries_;
};

// ---------------------------------------------------------------------------

template <class F>
TermPtr map_children(const TermPtr& t, F&& f) {
  using namespace node;
  auto g = [&](const TermPtr& c, std::size_t b) { return f(c, b); };
  return std::visit(
      [&](const auto& n) -> TermPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Pi>) {
          return make(Pi{g(n.domain, 0), g(n.codomain, 1), n.binder});
        } else if constexpr (std::is_same_v<T, Lam>) {
          return make(Lam{g(n.body, 1), n.binder});
        } else if constexpr (std::is_same_v<T, App>) {
          return make(App{g(n.fn, 0), g(n.arg, 0)});
        } else if constexpr (std::is_same_v<T, Nil>) {
          return make(Nil{g(n.state, 0)});
        } else if constexpr (std::is_same_v<T, Step>) {
          return make(Step{g(n.prefix, 0), g(n.event, 0), g(n.witness, 0)});
        } else if constexpr (std::is_same_v<T, TraceElim>) {
          return make(TraceElim{g(n.motive, 0), g(n.base, 0), g(n.step_case, 0), g(n.scrutinee, 0)});
        } else if constexpr (std::is_same_v<T, FinTraceTy>) {
          return make(FinTraceTy{g(n.src, 0), g(n.dst, 0)});
        } else if constexpr (std::is_same_v<T, StepTy>) {
          return make(StepTy{g(n.src, 0), g(n.event, 0), g(n.dst, 0)});
        } else if constexpr (std::is_same_v<T, Succ>) {
          return make(Succ{g(n.pred, 0)});
        } else {
          return t;
        }
      },
      t->node);
}

}  // namespace dekl
