#include "dekl/kernel.hpp"

#include <algorithm>
#include <map>

#include "dekl/errors.hpp"
#include "dekl/printer.hpp"

namespace dekl {

using namespace node;

std::string_view to_string(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::UnboundVariable: return "UnboundVariable";
    case TypeErrorKind::UniverseMismatch: return "UniverseMismatch";
    case TypeErrorKind::NotAFunction: return "NotAFunction";
    case TypeErrorKind::ConversionFailure: return "ConversionFailure";
    case TypeErrorKind::EndpointMismatch: return "EndpointMismatch";
    case TypeErrorKind::IllFormedContext: return "IllFormedContext";
    case TypeErrorKind::UnguardedCorecursion: return "UnguardedCorecursion";
    case TypeErrorKind::MotiveMismatch: return "MotiveMismatch";
    case TypeErrorKind::CannotInfer: return "CannotInfer";
  }
  return "?";
}

TypeError::TypeError(TypeErrorKind kind, const std::string& message, SourceSpan span)
    : std::runtime_error(message), kind_(kind), span_(std::move(span)) {}

bool is_canonical_head(const TermPtr& t) {
  return !(t->is<Var>() || t->is<App>() || t->is<TraceElim>());
}

namespace {

std::string show(const Context& ctx, const TermPtr& t) {
  std::vector<std::string> names = ctx.names();
  // Printing needs distinct names; disambiguate shadowed ones.
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (names[j] == names[i]) {
        names[i] += "_" + std::to_string(i);
        break;
      }
    }
  }
  return pretty_print(t, names);
}

TermPtr pi_universe(const Universe& d, const Universe& c) {
  bool dk = d.layer != Layer::Uc;
  bool ck = c.layer != Layer::Uc;
  if (dk != ck) return make(c);
  if (!dk) return mk::uc(std::max(d.level, c.level));
  if (d.layer == Layer::Prop && c.layer == Layer::Prop) return mk::prop();
  unsigned level = 0;
  if (d.layer == Layer::Type) level = std::max(level, d.level);
  if (c.layer == Layer::Type) level = std::max(level, c.level);
  return mk::type(level);
}

}  // namespace

TermPtr trace_elim_step_type(const TermPtr& motive, const TermPtr& src) {
  // (σ1 : State) (τ : FinTrace(σ0, σ1)) (e : Event) (σ2 : State) (π : Step(σ1, e, σ2))
  //   (ih : P σ1 τ) -> P σ2 (step(τ, e, π))
  TermPtr result = mk::apps(shift(motive, 6), {mk::var(2), mk::step(mk::var(4), mk::var(3), mk::var(1))});
  TermPtr ih = mk::apps(shift(motive, 5), {mk::var(4), mk::var(3)});
  TermPtr t = mk::pi(ih, result, "ih");
  t = mk::pi(mk::step_ty(mk::var(3), mk::var(1), mk::var(0)), t, "p");
  t = mk::pi(mk::state_ty(), t, "s2");
  t = mk::pi(mk::event_ty(), t, "e");
  t = mk::pi(mk::fin_trace(shift(src, 1), mk::var(0)), t, "t");
  return mk::pi(mk::state_ty(), t, "s1");
}

Kernel::Kernel(Signature sig, std::size_t fuel) : sig_(std::move(sig)), fuel_(fuel) {}

void Kernel::Fuel::burn() {
  if (left == 0) throw InternalError("normalization fuel exhausted");
  --left;
}

// --- reduction ---------------------------------------------------------------

std::optional<TermPtr> Kernel::contract_elim(const TraceElim& el, const TermPtr& scrutinee,
                                             const TermPtr& witness) const {
  const auto* st = scrutinee->as<Step>();
  const auto* w = witness->as<StepWitness>();
  if (!st || !w) return std::nullopt;
  auto index = system().find_witness(w->name);
  if (!index) return std::nullopt;
  const StepEdge& edge = system().step(*index);
  TermPtr ih = mk::trace_elim(el.motive, el.base, el.step_case, st->prefix);
  return mk::apps(el.step_case,
                  {mk::state(edge.src), st->prefix, st->event, mk::state(edge.dst), witness, ih});
}

TermPtr Kernel::whnf_fuel(const TermPtr& t, Fuel& fuel) const {
  TermPtr cur = t;
  for (;;) {
    if (const auto* app = cur->as<App>()) {
      TermPtr fn = whnf_fuel(app->fn, fuel);
      if (const auto* lam = fn->as<Lam>()) {
        fuel.burn();
        cur = subst(lam->body, app->arg);
        continue;
      }
      return fn == app->fn ? cur : mk::app(fn, app->arg);
    }
    if (const auto* el = cur->as<TraceElim>()) {
      TermPtr sc = whnf_fuel(el->scrutinee, fuel);
      if (sc->is<Nil>()) {
        fuel.burn();
        cur = el->base;
        continue;
      }
      if (const auto* st = sc->as<Step>()) {
        TermPtr w = whnf_fuel(st->witness, fuel);
        TermPtr step = w == st->witness ? sc : mk::step(st->prefix, st->event, w);
        if (auto next = contract_elim(*el, step, w)) {
          fuel.burn();
          cur = *next;
          continue;
        }
        sc = step;
      }
      return sc == el->scrutinee ? cur : mk::trace_elim(el->motive, el->base, el->step_case, sc);
    }
    return cur;
  }
}

TermPtr Kernel::nf_fuel(const TermPtr& t, Fuel& fuel) const {
  TermPtr w = whnf_fuel(t, fuel);
  return map_children(w, [&](const TermPtr& c, std::size_t) { return nf_fuel(c, fuel); });
}

TermPtr Kernel::whnf(const TermPtr& t) const {
  Fuel fuel{fuel_};
  return whnf_fuel(t, fuel);
}

TermPtr Kernel::nf(const TermPtr& t) const {
  Fuel fuel{fuel_};
  return nf_fuel(t, fuel);
}

NormalForm Kernel::normalize(const Context&, const TermPtr& t) const {
  TermPtr n = nf(t);
  return NormalForm{n, is_canonical_head(n)};
}

std::optional<TermPtr> Kernel::reduce_step(const TermPtr& t) const {
  if (const auto* app = t->as<App>()) {
    if (const auto* lam = app->fn->as<Lam>()) return subst(lam->body, app->arg);
  }
  if (const auto* el = t->as<TraceElim>()) {
    if (el->scrutinee->is<Nil>()) return el->base;
    if (const auto* st = el->scrutinee->as<Step>()) {
      if (auto next = contract_elim(*el, el->scrutinee, st->witness)) return next;
    }
  }
  auto kids = children(*t);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    auto reduced = reduce_step(*kids[i].term);
    if (!reduced) continue;
    std::size_t at = 0;
    return map_children(t, [&](const TermPtr& c, std::size_t) { return at++ == i ? *reduced : c; });
  }
  return std::nullopt;
}

// --- typing ------------------------------------------------------------------

bool Kernel::conv(const Context&, const TermPtr& a, const TermPtr& b) const { return alpha_eq(nf(a), nf(b)); }

std::string Kernel::state_name(const TermPtr& s) const {
  TermPtr n = nf(s);
  if (const auto* c = n->as<StateConst>()) return c->name;
  return pretty_print(n);
}

TermPtr Kernel::infer_universe(const Context& ctx, const TermPtr& t) const {
  TermPtr ty = whnf(infer(ctx, t));
  if (!ty->is<Universe>()) {
    throw TypeError(TypeErrorKind::UniverseMismatch,
                    "'" + show(ctx, t) + "' is not a type; it has type '" + show(ctx, nf(ty)) + "'");
  }
  return ty;
}

void Kernel::check_context(const Context& ctx) const {
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const ContextEntry& e = ctx.entries()[i];
    Context prefix = ctx.prefix(i);
    try {
      TermPtr ty = whnf(infer(prefix, e.type));
      if (!ty->is<Universe>()) {
        throw TypeError(TypeErrorKind::IllFormedContext,
                        "context entry '" + e.name + " : " + show(prefix, e.type) + "' is not a type");
      }
    } catch (const TypeError& err) {
      if (err.kind() == TypeErrorKind::IllFormedContext) throw;
      throw TypeError(TypeErrorKind::IllFormedContext, "context entry '" + e.name + "': " + err.what());
    }
  }
}

TermPtr Kernel::infer(const Context& ctx, const TermPtr& t) const {
  if (const auto* v = t->as<Var>()) {
    if (auto ty = ctx.lookup(v->index)) return *ty;
    throw TypeError(TypeErrorKind::UnboundVariable, "unbound variable #" + std::to_string(v->index));
  }
  if (const auto* u = t->as<Universe>()) {
    switch (u->layer) {
      case Layer::Uc: return mk::uc(u->level + 1);
      case Layer::Type: return mk::type(u->level + 1);
      case Layer::Prop: return mk::type(0);
    }
  }
  if (const auto* pi = t->as<Pi>()) {
    TermPtr du = infer_universe(ctx, pi->domain);
    TermPtr cu = infer_universe(ctx.extended(pi->binder, pi->domain), pi->codomain);
    return pi_universe(*du->as<Universe>(), *cu->as<Universe>());
  }
  if (t->is<Lam>()) {
    throw TypeError(TypeErrorKind::CannotInfer,
                    "cannot infer the type of '" + show(ctx, t) + "'; a function needs an expected type");
  }
  if (const auto* app = t->as<App>()) {
    Spine sp = unspine(t);
    if (sp.head->is<Lam>()) return infer_spine(ctx, sp.head, sp.args);
    TermPtr fty = whnf(infer(ctx, app->fn));
    const auto* pi = fty->as<Pi>();
    if (!pi) {
      throw TypeError(TypeErrorKind::NotAFunction,
                      "'" + show(ctx, app->fn) + "' is not a function; it has type '" + show(ctx, nf(fty)) + "'");
    }
    check(ctx, app->arg, pi->domain);
    return subst(pi->codomain, app->arg);
  }
  if (const auto* s = t->as<StateConst>()) {
    if (!system().has_state(s->name)) {
      throw TypeError(TypeErrorKind::UnboundVariable, "unknown state '" + s->name + "'");
    }
    return mk::state_ty();
  }
  if (const auto* e = t->as<EventConst>()) {
    if (!system().has_event(e->name)) {
      throw TypeError(TypeErrorKind::UnboundVariable, "unknown event '" + e->name + "'");
    }
    return mk::event_ty();
  }
  if (const auto* w = t->as<StepWitness>()) {
    auto index = system().find_witness(w->name);
    if (!index) throw TypeError(TypeErrorKind::UnboundVariable, "unknown step witness '" + w->name + "'");
    const StepEdge& edge = system().step(*index);
    return mk::step_ty(mk::state(edge.src), mk::event(edge.event), mk::state(edge.dst));
  }
  if (const auto* c = t->as<CorecRef>()) {
    if (!sig_.corecs.count(c->name)) {
      throw TypeError(TypeErrorKind::UnboundVariable, "unknown corecursive definition '" + c->name + "'");
    }
    return mk::inf_trace_ty();
  }
  if (const auto* n = t->as<Nil>()) {
    check(ctx, n->state, mk::state_ty());
    return mk::fin_trace(n->state, n->state);
  }
  if (const auto* st = t->as<Step>()) {
    TermPtr tt = whnf(infer(ctx, st->prefix));
    const auto* ft = tt->as<FinTraceTy>();
    if (!ft) {
      TypeError err(TypeErrorKind::ConversionFailure,
                    "'" + show(ctx, st->prefix) + "' is not a finite trace; it has type '" + show(ctx, nf(tt)) + "'");
      err.actual = nf(tt);
      throw err;
    }
    check(ctx, st->event, mk::event_ty());
    TermPtr pt = whnf(infer(ctx, st->witness));
    const auto* sty = pt->as<StepTy>();
    if (!sty) {
      TypeError err(TypeErrorKind::ConversionFailure,
                    "'" + show(ctx, st->witness) + "' is not a step witness; it has type '" + show(ctx, nf(pt)) + "'");
      err.actual = nf(pt);
      throw err;
    }
    if (!conv(ctx, ft->dst, sty->src)) {
      TypeError err(TypeErrorKind::EndpointMismatch,
                    "trace ends at '" + show(ctx, nf(ft->dst)) + "' but step '" + show(ctx, st->witness) +
                        "' starts at '" + show(ctx, nf(sty->src)) + "'");
      err.expected_state = state_name(ft->dst);
      err.actual_state = state_name(sty->src);
      throw err;
    }
    if (!conv(ctx, st->event, sty->event)) {
      TypeError err(TypeErrorKind::ConversionFailure,
                    "step '" + show(ctx, st->witness) + "' is labelled '" + show(ctx, nf(sty->event)) + "', not '" +
                        show(ctx, nf(st->event)) + "'");
      err.expected = nf(sty->event);
      err.actual = nf(st->event);
      throw err;
    }
    return mk::fin_trace(ft->src, sty->dst);
  }
  if (const auto* el = t->as<TraceElim>()) return infer_elim(ctx, *el);
  if (const auto* ft = t->as<FinTraceTy>()) {
    check(ctx, ft->src, mk::state_ty());
    check(ctx, ft->dst, mk::state_ty());
    return mk::uc(0);
  }
  if (const auto* sty = t->as<StepTy>()) {
    check(ctx, sty->src, mk::state_ty());
    check(ctx, sty->event, mk::event_ty());
    check(ctx, sty->dst, mk::state_ty());
    return mk::uc(0);
  }
  if (t->is<StateTy>() || t->is<EventTy>() || t->is<NatTy>() || t->is<InfTraceTy>()) return mk::uc(0);
  if (t->is<Bottom>()) return mk::prop();
  if (t->is<Zero>()) return mk::nat_ty();
  if (const auto* s = t->as<Succ>()) {
    check(ctx, s->pred, mk::nat_ty());
    return mk::nat_ty();
  }
  throw InternalError("infer: unhandled term " + dump(t));
}

// (λx.b) a1 a2 ... an is typed like a let: a1 must synthesize, and the
// instantiated body b[a1/x] a2 ... an carries the type. The lambda has no
// annotation, so typing b under a bare x : A1 would forget a1's value.
TermPtr Kernel::infer_spine(const Context& ctx, const TermPtr& lam, const std::vector<TermPtr>& args) const {
  infer(ctx, args.front());
  return infer(ctx, instantiate_spine(lam, args));
}

void Kernel::check_spine(const Context& ctx, const TermPtr& lam, const std::vector<TermPtr>& args,
                         const TermPtr& type) const {
  infer(ctx, args.front());
  check(ctx, instantiate_spine(lam, args), type);
}

TermPtr Kernel::instantiate_spine(const TermPtr& lam, const std::vector<TermPtr>& args) {
  std::vector<TermPtr> rest(args.begin() + 1, args.end());
  return respine(subst(lam->as<Lam>()->body, args.front()), rest);
}

void Kernel::check(const Context& ctx, const TermPtr& t, const TermPtr& type) const {
  if (const auto* lam = t->as<Lam>()) {
    TermPtr w = whnf(type);
    const auto* pi = w->as<Pi>();
    if (!pi) {
      TypeError err(TypeErrorKind::ConversionFailure,
                    "function '" + show(ctx, t) + "' checked against non-function type '" + show(ctx, nf(w)) + "'");
      err.expected = nf(w);
      throw err;
    }
    check(ctx.extended(lam->binder, pi->domain), lam->body, pi->codomain);
    return;
  }
  if (t->is<App>()) {
    Spine sp = unspine(t);
    if (sp.head->is<Lam>()) {
      check_spine(ctx, sp.head, sp.args, type);
      return;
    }
  }
  TermPtr actual = infer(ctx, t);
  TermPtr want = nf(type);
  TermPtr got = nf(actual);
  if (!alpha_eq(want, got)) {
    TypeError err(TypeErrorKind::ConversionFailure, "'" + show(ctx, t) + "' has type '" + show(ctx, got) +
                                                        "' but '" + show(ctx, want) + "' was expected");
    err.expected = want;
    err.actual = got;
    throw err;
  }
}

bool Kernel::accepts(const Context& ctx, const TermPtr& t, const TermPtr& type) const {
  try {
    check(ctx, t, type);
    return true;
  } catch (const TypeError&) {
    return false;
  }
}

void Kernel::check_motive(const Context& ctx, const TermPtr& motive, const TermPtr& src) const {
  // P : (σ' : State) -> FinTrace(σ0, σ') -> U
  const TermPtr domains[2] = {mk::state_ty(), mk::fin_trace(weaken(src), mk::var(0))};
  auto mismatch = [&](const std::string& why) {
    return TypeError(TypeErrorKind::MotiveMismatch,
                     "motive '" + show(ctx, motive) + "' does not have type (s : State) -> FinTrace(" +
                         show(ctx, nf(src)) + ", s) -> U: " + why);
  };
  Context c = ctx;
  TermPtr cur = motive;
  std::size_t i = 0;
  while (i < 2) {
    const auto* lam = cur->as<Lam>();
    if (!lam) break;
    c.push(lam->binder, domains[i]);
    cur = lam->body;
    ++i;
  }
  TermPtr ty = infer(c, cur);
  for (; i < 2; ++i) {
    TermPtr w = whnf(ty);
    const auto* pi = w->as<Pi>();
    if (!pi) throw mismatch("expected a function, found '" + show(c, nf(w)) + "'");
    if (!conv(c, pi->domain, domains[i])) {
      throw mismatch("argument " + std::to_string(i + 1) + " has type '" + show(c, nf(pi->domain)) + "'");
    }
    c.push(pi->binder, pi->domain);
    ty = pi->codomain;
  }
  TermPtr u = whnf(ty);
  if (!u->is<Universe>()) throw mismatch("result '" + show(c, nf(u)) + "' is not a universe");
}

TermPtr Kernel::infer_elim(const Context& ctx, const TraceElim& el) const {
  TermPtr st = whnf(infer(ctx, el.scrutinee));
  const auto* ft = st->as<FinTraceTy>();
  if (!ft) {
    TypeError err(TypeErrorKind::ConversionFailure,
                  "trace_elim scrutinee '" + show(ctx, el.scrutinee) + "' has type '" + show(ctx, nf(st)) +
                      "', not a finite trace type");
    err.actual = nf(st);
    throw err;
  }
  check_motive(ctx, el.motive, ft->src);
  check(ctx, el.base, mk::apps(el.motive, {ft->src, mk::nil(ft->src)}));
  check(ctx, el.step_case, trace_elim_step_type(el.motive, ft->src));
  return mk::apps(el.motive, {ft->dst, el.scrutinee});
}

// --- modules -----------------------------------------------------------------

Signature module_signature(const ModuleAST& m) {
  Signature sig;
  sig.system = std::make_shared<const TransitionSystem>(m.system());
  for (const auto* c : m.corecs()) sig.corecs.insert(c->name);
  return sig;
}

void check_guardedness(const CorecDecl& d, const std::set<std::string, std::less<>>& corecs) {
  if (!d.head) {
    throw TypeError(TypeErrorKind::UnguardedCorecursion,
                    "corec '" + d.name + "' is the bare reference '" + d.tail_ref + "'; no head/tail guard", d.span);
  }
  if (mentions_corec(d.head)) {
    throw TypeError(TypeErrorKind::UnguardedCorecursion,
                    "corec '" + d.name + "' refers to a corecursive name in its head", d.span);
  }
  if (d.tail_event && mentions_corec(d.tail_event)) {
    throw TypeError(TypeErrorKind::UnguardedCorecursion,
                    "corec '" + d.name + "' refers to a corecursive name in its tail event", d.span);
  }
  if (!corecs.count(d.tail_ref)) {
    throw TypeError(TypeErrorKind::UnboundVariable,
                    "corec '" + d.name + "' continues with unknown corecursive name '" + d.tail_ref + "'", d.span);
  }
}

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

CheckedModule check_module(const ModuleAST& m) {
  CheckedModule out;
  out.module = std::make_shared<const ModuleAST>(m);
  out.signature = module_signature(m);
  out.system = out.signature.system;
  if (auto err = validate_system(*out.system)) throw SemanticError(m.file + ": " + *err);

  Kernel k(out.signature);
  const Context empty;
  for (const auto& decl : m.declarations) {
    std::visit(overloaded{
                   [&](const DefDecl& d) {
                     try {
                       TermPtr u = k.whnf(k.infer(empty, d.type));
                       if (!u->is<Universe>()) {
                         throw TypeError(TypeErrorKind::UniverseMismatch,
                                         "type of '" + d.name + "' is not a type: '" + pretty_print(d.type) + "'");
                       }
                       k.check(empty, d.body, d.type);
                       out.defs.push_back({d.name, d.type, d.body, k.nf(d.body)});
                     } catch (TypeError& e) {
                       e.set_span(d.span);
                       throw;
                     }
                   },
                   [&](const CorecDecl& d) {
                     try {
                       check_guardedness(d, out.signature.corecs);
                       k.check(empty, d.head, mk::state_ty());
                       k.check(empty, d.tail_event, mk::event_ty());
                     } catch (TypeError& e) {
                       e.set_span(d.span);
                       throw;
                     }
                   },
                   [](const auto&) {},
               },
               decl);
  }
  return out;
}

std::vector<std::string> Observation::flatten() const {
  std::vector<std::string> out;
  for (const auto& [s, e] : steps) {
    out.push_back(s);
    out.push_back(e);
  }
  out.push_back(final_state);
  return out;
}

Observation observe_inftrace(const ModuleAST& m, std::string_view name, std::size_t depth) {
  Signature sig = module_signature(m);
  std::map<std::string, const CorecDecl*, std::less<>> decls;
  for (const auto* c : m.corecs()) {
    check_guardedness(*c, sig.corecs);
    decls.emplace(c->name, c);
  }
  if (!decls.count(name)) throw SemanticError("unknown corecursive definition '" + std::string(name) + "'");

  Kernel k(sig);
  std::map<std::string, std::pair<std::string, std::string>, std::less<>> unfolded;
  auto unfold = [&](const std::string& n) -> const std::pair<std::string, std::string>& {
    auto it = unfolded.find(n);
    if (it != unfolded.end()) return it->second;
    const CorecDecl* d = decls.at(n);
    TermPtr h = k.nf(d->head);
    TermPtr e = k.nf(d->tail_event);
    const auto* hs = h->as<StateConst>();
    const auto* ev = e->as<EventConst>();
    if (!hs || !ev) throw SemanticError("corec '" + n + "' does not observe to a state and an event");
    return unfolded.emplace(n, std::make_pair(hs->name, ev->name)).first->second;
  };

  Observation obs;
  std::string cur(name);
  for (std::size_t i = 0; i < depth; ++i) {
    obs.steps.push_back(unfold(cur));
    cur = decls.at(cur)->tail_ref;
  }
  obs.final_state = unfold(cur).first;
  return obs;
}

}  // namespace dekl
