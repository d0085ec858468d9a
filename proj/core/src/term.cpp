#include "dekl/term.hpp"

#include <algorithm>
#include <sstream>

namespace dekl {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::pair<std::size_t, std::size_t> node_measures(const Node& n) {
  if (const auto* v = std::get_if<node::Var>(&n)) return {1, v->index + 1};
  std::size_t total = 1;
  std::size_t bound = 0;
  Term probe{n, 0, 0};
  for (const auto& c : children(probe)) {
    total += (*c.term)->size;
    std::size_t inner = (*c.term)->free_bound;
    if (inner > c.binders) bound = std::max(bound, inner - c.binders);
  }
  return {total, bound};
}

// Generic free-variable walk: calls `on_var(index, depth)` for every Var.
template <class F>
bool any_var(const TermPtr& t, std::size_t depth, F&& on_var) {
  if (const auto* v = t->as<node::Var>()) return on_var(v->index, depth);
  for (const auto& c : children(*t)) {
    if (any_var(*c.term, depth + c.binders, on_var)) return true;
  }
  return false;
}

}  // namespace

TermPtr make(Node n) {
  auto [size, bound] = node_measures(n);
  return std::make_shared<const Term>(Term{std::move(n), size, bound});
}

namespace mk {
TermPtr var(std::size_t index) { return make(node::Var{index}); }
TermPtr uc(unsigned level) { return make(node::Universe{Layer::Uc, level}); }
TermPtr type(unsigned level) { return make(node::Universe{Layer::Type, level}); }
TermPtr prop() { return make(node::Universe{Layer::Prop, 0}); }
TermPtr pi(TermPtr domain, TermPtr codomain, std::string binder) {
  return make(node::Pi{std::move(domain), std::move(codomain), std::move(binder)});
}
TermPtr arrow(TermPtr domain, TermPtr codomain) { return pi(std::move(domain), weaken(codomain), "_"); }
TermPtr lam(TermPtr body, std::string binder) { return make(node::Lam{std::move(body), std::move(binder)}); }
TermPtr app(TermPtr fn, TermPtr arg) { return make(node::App{std::move(fn), std::move(arg)}); }
TermPtr apps(TermPtr fn, std::initializer_list<TermPtr> args) {
  for (const auto& a : args) fn = app(fn, a);
  return fn;
}
TermPtr state(std::string name) { return make(node::StateConst{std::move(name)}); }
TermPtr event(std::string name) { return make(node::EventConst{std::move(name)}); }
TermPtr witness(std::string name) { return make(node::StepWitness{std::move(name)}); }
TermPtr nil(TermPtr state) { return make(node::Nil{std::move(state)}); }
TermPtr step(TermPtr prefix, TermPtr event, TermPtr witness) {
  return make(node::Step{std::move(prefix), std::move(event), std::move(witness)});
}
TermPtr trace_elim(TermPtr motive, TermPtr base, TermPtr step_case, TermPtr scrutinee) {
  return make(node::TraceElim{std::move(motive), std::move(base), std::move(step_case), std::move(scrutinee)});
}
TermPtr fin_trace(TermPtr src, TermPtr dst) { return make(node::FinTraceTy{std::move(src), std::move(dst)}); }
TermPtr step_ty(TermPtr src, TermPtr event, TermPtr dst) {
  return make(node::StepTy{std::move(src), std::move(event), std::move(dst)});
}
TermPtr state_ty() { return make(node::StateTy{}); }
TermPtr event_ty() { return make(node::EventTy{}); }
TermPtr nat_ty() { return make(node::NatTy{}); }
TermPtr zero() { return make(node::Zero{}); }
TermPtr succ(TermPtr pred) { return make(node::Succ{std::move(pred)}); }
TermPtr nat(unsigned n) {
  TermPtr t = zero();
  while (n-- > 0) t = succ(t);
  return t;
}
TermPtr inf_trace_ty() { return make(node::InfTraceTy{}); }
TermPtr corec(std::string name) { return make(node::CorecRef{std::move(name)}); }
TermPtr bottom() { return make(node::Bottom{}); }
}  // namespace mk

std::vector<Child> children(const Term& t) {
  using namespace node;
  return std::visit(
      overloaded{
          [](const Pi& n) -> std::vector<Child> { return {{&n.domain, 0}, {&n.codomain, 1}}; },
          [](const Lam& n) -> std::vector<Child> { return {{&n.body, 1}}; },
          [](const App& n) -> std::vector<Child> { return {{&n.fn, 0}, {&n.arg, 0}}; },
          [](const Nil& n) -> std::vector<Child> { return {{&n.state, 0}}; },
          [](const Step& n) -> std::vector<Child> { return {{&n.prefix, 0}, {&n.event, 0}, {&n.witness, 0}}; },
          [](const TraceElim& n) -> std::vector<Child> {
            return {{&n.motive, 0}, {&n.base, 0}, {&n.step_case, 0}, {&n.scrutinee, 0}};
          },
          [](const FinTraceTy& n) -> std::vector<Child> { return {{&n.src, 0}, {&n.dst, 0}}; },
          [](const StepTy& n) -> std::vector<Child> { return {{&n.src, 0}, {&n.event, 0}, {&n.dst, 0}}; },
          [](const Succ& n) -> std::vector<Child> { return {{&n.pred, 0}}; },
          [](const auto&) -> std::vector<Child> { return {}; },
      },
      t.node);
}

namespace {

TermPtr shift_rec(const TermPtr& t, std::ptrdiff_t delta, std::size_t cutoff) {
  if (const auto* v = t->as<node::Var>()) {
    if (v->index < cutoff) return t;
    return mk::var(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(v->index) + delta));
  }
  if (free_bound(t) <= cutoff) return t;
  return map_children(t, [&](const TermPtr& c, std::size_t b) { return shift_rec(c, delta, cutoff + b); });
}

TermPtr subst_rec(const TermPtr& t, std::size_t target, const TermPtr& s) {
  if (const auto* v = t->as<node::Var>()) {
    if (v->index == target) return shift(s, static_cast<std::ptrdiff_t>(target));
    if (v->index > target) return mk::var(v->index - 1);
    return t;
  }
  if (free_bound(t) <= target) return t;
  return map_children(t, [&](const TermPtr& c, std::size_t b) { return subst_rec(c, target + b, s); });
}

}  // namespace

TermPtr shift(const TermPtr& t, std::ptrdiff_t delta, std::size_t cutoff) {
  if (delta == 0) return t;
  return shift_rec(t, delta, cutoff);
}

TermPtr weaken(const TermPtr& t, std::size_t at) { return shift(t, 1, at); }

TermPtr subst(const TermPtr& body, const TermPtr& s) { return subst_rec(body, 0, s); }

TermPtr subst_at(const TermPtr& t, std::size_t index, const TermPtr& s) { return subst_rec(t, index, s); }

bool alpha_eq(const TermPtr& a, const TermPtr& b) {
  using namespace node;
  if (a == b) return true;
  if (a->node.index() != b->node.index() || a->size != b->size) return false;
  bool leaf_equal = std::visit(
      overloaded{
          [&](const Var& x) { return x.index == b->as<Var>()->index; },
          [&](const Universe& x) {
            const auto* y = b->as<Universe>();
            return x.layer == y->layer && x.level == y->level;
          },
          [&](const StateConst& x) { return x.name == b->as<StateConst>()->name; },
          [&](const EventConst& x) { return x.name == b->as<EventConst>()->name; },
          [&](const StepWitness& x) { return x.name == b->as<StepWitness>()->name; },
          [&](const CorecRef& x) { return x.name == b->as<CorecRef>()->name; },
          [](const auto&) { return true; },
      },
      a->node);
  if (!leaf_equal) return false;
  auto ca = children(*a);
  auto cb = children(*b);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!alpha_eq(*ca[i].term, *cb[i].term)) return false;
  }
  return true;
}

std::size_t free_bound(const TermPtr& t) { return t->free_bound; }

bool scope_valid(const TermPtr& t, std::size_t depth) { return free_bound(t) <= depth; }

bool is_closed(const TermPtr& t) { return free_bound(t) == 0; }

bool mentions_var(const TermPtr& t, std::size_t index) {
  if (t->free_bound <= index) return false;
  return any_var(t, 0, [&](std::size_t i, std::size_t depth) { return i == index + depth; });
}

bool mentions_corec(const TermPtr& t) {
  if (t->is<node::CorecRef>()) return true;
  for (const auto& c : children(*t)) {
    if (mentions_corec(*c.term)) return true;
  }
  return false;
}

Spine unspine(const TermPtr& t) {
  Spine s{t, {}};
  while (const auto* a = s.head->as<node::App>()) {
    s.args.push_back(a->arg);
    s.head = a->fn;
  }
  std::reverse(s.args.begin(), s.args.end());
  return s;
}

TermPtr respine(TermPtr head, const std::vector<TermPtr>& args) {
  for (const auto& a : args) head = mk::app(head, a);
  return head;
}

namespace {

void dump_rec(std::ostringstream& out, const TermPtr& t) {
  using namespace node;
  std::visit(
      overloaded{
          [&](const Var& n) { out << '#' << n.index; },
          [&](const Universe& n) {
            switch (n.layer) {
              case Layer::Uc: out << "Uc" << n.level; break;
              case Layer::Type: out << "Type" << n.level; break;
              case Layer::Prop: out << "Prop"; break;
            }
          },
          [&](const StateConst& n) { out << "state:" << n.name; },
          [&](const EventConst& n) { out << "event:" << n.name; },
          [&](const StepWitness& n) { out << "witness:" << n.name; },
          [&](const CorecRef& n) { out << "corec:" << n.name; },
          [&](const StateTy&) { out << "State"; },
          [&](const EventTy&) { out << "Event"; },
          [&](const NatTy&) { out << "Nat"; },
          [&](const Zero&) { out << "zero"; },
          [&](const InfTraceTy&) { out << "InfTrace"; },
          [&](const Bottom&) { out << "bot"; },
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            const char* tag = std::is_same_v<T, Pi>           ? "pi"
                              : std::is_same_v<T, Lam>        ? "lam"
                              : std::is_same_v<T, App>        ? "app"
                              : std::is_same_v<T, Nil>        ? "nil"
                              : std::is_same_v<T, Step>       ? "step"
                              : std::is_same_v<T, TraceElim>  ? "trace_elim"
                              : std::is_same_v<T, FinTraceTy> ? "FinTrace"
                              : std::is_same_v<T, StepTy>     ? "Step"
                                                              : "succ";
            out << '(' << tag;
            for (const auto& c : children(*t)) {
              out << ' ';
              dump_rec(out, *c.term);
            }
            out << ')';
          },
      },
      t->node);
}

}  // namespace

std::string dump(const TermPtr& t) {
  std::ostringstream out;
  dump_rec(out, t);
  return out.str();
}

std::optional<TermPtr> Context::lookup(std::size_t index) const {
  if (index >= entries_.size()) return std::nullopt;
  return shift(entry_for(index).type, static_cast<std::ptrdiff_t>(index + 1));
}

Context Context::extended(std::string name, TermPtr type) const {
  Context c = *this;
  c.push(std::move(name), std::move(type));
  return c;
}

Context Context::prefix(std::size_t n) const {
  return Context(std::vector<ContextEntry>(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(n)));
}

std::vector<std::string> Context::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

}  // namespace dekl
