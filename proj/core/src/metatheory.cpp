#include "dekl/metatheory.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <thread>
#include <unordered_map>

#include "dekl/errors.hpp"
#include "dekl/printer.hpp"

namespace dekl {

using namespace node;

void GenConfig::validate() const {
  if (seed == 0 || maxTermSize == 0 || maxCtxLen == 0 || iterations == 0) {
    throw std::invalid_argument("generator configuration fields must all be positive");
  }
}

Signature credential_signature() {
  auto ts = std::make_shared<TransitionSystem>();
  for (const char* s : {"S0", "S1", "S2"}) ts->add_state(s);
  for (const char* e : {"Issue", "Use", "Revoke"}) ts->add_event(e);
  ts->add_step({"S0", "Issue", "S1", "issue0"});
  ts->add_step({"S1", "Use", "S1", "use1"});
  ts->add_step({"S1", "Revoke", "S2", "revoke1"});
  Signature sig;
  sig.system = ts;
  return sig;
}

std::string format_judgment(const Context& ctx, const TermPtr& t, const TermPtr& type) {
  std::string out;
  Context prefix;
  for (const auto& e : ctx.entries()) {
    if (!out.empty()) out += ", ";
    out += e.name + " : " + pretty_print(e.type, prefix);
    prefix.push(e.name, e.type);
  }
  return out + (out.empty() ? "" : " ") + "|- " + pretty_print(t, ctx) + " : " + pretty_print(type, ctx);
}

// --- generation ----------------------------------------------------------------

namespace {

enum class Strat { Var, FnApp, Redex, Elim, CopyElim, Zero, Succ, StateC, EventC, Nil, Step, Witness, Lam, TypeTerm, Leaf };

class GenRun {
 public:
  GenRun(const Kernel& k, std::mt19937_64& rng, std::size_t max_size) : k_(k), rng_(rng), max_size_(max_size) {}

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  template <class T>
  const T& choose(const std::vector<T>& v) {
    return v[pick(v.size())];
  }

  void tick() {
    if (++attempts_ > kMaxGenAttempts) {
      throw GenerationError("term generation gave up after " + std::to_string(kMaxGenAttempts) + " attempts");
    }
  }

  TermPtr var_type(const Context& ctx, std::size_t i) { return k_.nf(*ctx.lookup(i)); }

  std::vector<TermPtr> state_terms(const Context& ctx) {
    std::vector<TermPtr> out;
    for (const auto& s : k_.system().states()) out.push_back(mk::state(s));
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (var_type(ctx, i)->is<StateTy>()) out.push_back(mk::var(i));
    }
    return out;
  }

  std::vector<TermPtr> event_terms(const Context& ctx) {
    std::vector<TermPtr> out;
    for (const auto& e : k_.system().events()) out.push_back(mk::event(e));
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (var_type(ctx, i)->is<EventTy>()) out.push_back(mk::var(i));
    }
    return out;
  }

  /// FinTrace types likely to be inhabited in `ctx`.
  std::vector<TermPtr> trace_types(const Context& ctx) {
    std::vector<TermPtr> out;
    for (const auto& s : state_terms(ctx)) out.push_back(mk::fin_trace(s, s));
    const auto& ts = k_.system();
    for (const auto& a : ts.states()) {
      for (const auto& b : ts.states()) {
        if (a != b && reachable(ts, a, b)) out.push_back(mk::fin_trace(mk::state(a), mk::state(b)));
      }
    }
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      TermPtr t = var_type(ctx, i);
      if (t->is<FinTraceTy>()) out.push_back(t);
    }
    return out;
  }

  TermPtr entry_type(const Context& ctx) {
    const auto& ts = k_.system();
    switch (pick(11)) {
      case 0:
      case 1: return mk::nat_ty();
      case 2:
      case 3: return mk::state_ty();
      case 4: return mk::event_ty();
      case 5: {
        auto states = state_terms(ctx);
        return mk::fin_trace(choose(states), choose(states));
      }
      case 6: {
        auto states = state_terms(ctx);
        auto events = event_terms(ctx);
        if (chance(0.5) && !ts.steps().empty()) {
          const StepEdge& e = choose(ts.steps());
          return mk::step_ty(mk::state(e.src), mk::event(e.event), mk::state(e.dst));
        }
        return mk::step_ty(choose(states), choose(events), choose(states));
      }
      case 7: return mk::arrow(mk::nat_ty(), mk::nat_ty());
      case 8: return mk::arrow(mk::state_ty(), mk::nat_ty());
      case 9: return mk::pi(mk::state_ty(), mk::fin_trace(mk::var(0), mk::var(0)), "s");
      default: return mk::arrow(choose(trace_types(ctx)), mk::nat_ty());
    }
  }

  TermPtr target_type(const Context& ctx) {
    switch (pick(14)) {
      case 0:
      case 1:
      case 2: return mk::nat_ty();
      case 3: return mk::state_ty();
      case 4: return mk::event_ty();
      case 5:
      case 6:
      case 7: return choose(trace_types(ctx));
      case 8: {
        const StepEdge& e = choose(k_.system().steps());
        return mk::step_ty(mk::state(e.src), mk::event(e.event), mk::state(e.dst));
      }
      case 9: return mk::arrow(mk::nat_ty(), mk::nat_ty());
      case 10: return mk::pi(mk::state_ty(), mk::fin_trace(mk::var(0), mk::var(0)), "s");
      case 11: return mk::uc(0);
      case 12: return mk::arrow(choose(trace_types(ctx)), mk::nat_ty());
      default:
        if (ctx.empty()) return mk::nat_ty();
        return var_type(ctx, pick(ctx.size()));
    }
  }

  TermPtr closed_base_type() {
    if (chance(0.4)) return mk::nat_ty();
    return choose(trace_types(Context{}));
  }

  std::optional<TermPtr> gen(const Context& ctx, const TermPtr& type, std::size_t budget) {
    tick();
    if (budget == 0) return std::nullopt;
    TermPtr a = k_.nf(type);

    std::vector<std::pair<unsigned, Strat>> opts;
    std::vector<std::size_t> vars;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (alpha_eq(var_type(ctx, i), a)) vars.push_back(i);
    }
    if (!vars.empty()) opts.push_back({3, Strat::Var});
    if (budget >= 3) opts.push_back({3, Strat::FnApp});
    if (budget >= 4) opts.push_back({2, Strat::Redex});
    if (budget >= 12 && !a->is<Pi>()) opts.push_back({2, Strat::Elim});
    if (a->is<NatTy>()) {
      opts.push_back({2, Strat::Zero});
      if (budget >= 2) opts.push_back({3, Strat::Succ});
    } else if (a->is<StateTy>()) {
      opts.push_back({3, Strat::StateC});
    } else if (a->is<EventTy>()) {
      opts.push_back({3, Strat::EventC});
    } else if (const auto* ft = a->as<FinTraceTy>()) {
      if (alpha_eq(ft->src, ft->dst) && budget >= 1 + ft->src->size) opts.push_back({3, Strat::Nil});
      if (budget >= 4) opts.push_back({4, Strat::Step});
      if (budget >= 14) opts.push_back({2, Strat::CopyElim});
    } else if (a->is<StepTy>()) {
      opts.push_back({3, Strat::Witness});
    } else if (a->is<Pi>()) {
      if (budget >= 2) opts.push_back({6, Strat::Lam});
    } else if (const auto* u = a->as<Universe>()) {
      if (u->layer == Layer::Uc && u->level == 0) {
        opts.push_back({4, Strat::TypeTerm});
      } else {
        opts.push_back({4, Strat::Leaf});
      }
    }

    for (int tries = 0; tries < 4 && !opts.empty(); ++tries) {
      unsigned total = 0;
      for (const auto& o : opts) total += o.first;
      unsigned r = static_cast<unsigned>(pick(total));
      std::size_t idx = 0;
      while (r >= opts[idx].first) r -= opts[idx++].first;
      Strat s = opts[idx].second;
      opts.erase(opts.begin() + static_cast<std::ptrdiff_t>(idx));
      if (auto t = apply(s, ctx, a, budget, vars)) {
        if ((*t)->size <= budget) return t;
      }
    }
    return std::nullopt;
  }

 private:
  std::optional<TermPtr> apply(Strat s, const Context& ctx, const TermPtr& a, std::size_t budget,
                               const std::vector<std::size_t>& vars) {
    const auto& ts = k_.system();
    switch (s) {
      case Strat::Var: return mk::var(choose(vars));
      case Strat::FnApp: return fn_app(ctx, a, budget);
      case Strat::Redex: {
        std::vector<TermPtr> arg_types = {mk::nat_ty(), mk::state_ty(), mk::event_ty()};
        auto traces = trace_types(ctx);
        arg_types.push_back(choose(traces));
        TermPtr a1 = choose(arg_types);
        std::size_t arg_budget = 1 + pick(budget - 3);
        auto arg = gen(ctx, a1, arg_budget);
        if (!arg) return std::nullopt;
        auto body = gen(ctx.extended("r", a1), weaken(a), budget - 2 - (*arg)->size);
        if (!body) return std::nullopt;
        return mk::app(mk::lam(*body, "r"), *arg);
      }
      case Strat::Elim: return elim(ctx, a, budget);
      case Strat::CopyElim: {
        const auto* ft = a->as<FinTraceTy>();
        TermPtr src = ft->src;
        TermPtr motive = mk::lam(mk::lam(mk::fin_trace(shift(src, 2), mk::var(1)), "u"), "s");
        TermPtr base = mk::nil(src);
        TermPtr body = mk::step(mk::var(0), mk::var(3), mk::var(1));
        TermPtr step_case = wrap_step_lams(body);
        std::size_t used = 1 + motive->size + base->size + step_case->size;
        if (used >= budget) return std::nullopt;
        auto sc = gen(ctx, a, budget - used);
        if (!sc) return std::nullopt;
        return mk::trace_elim(motive, base, step_case, *sc);
      }
      case Strat::Zero: return mk::zero();
      case Strat::Succ: {
        auto p = gen(ctx, mk::nat_ty(), budget - 1);
        if (!p) return std::nullopt;
        return mk::succ(*p);
      }
      case Strat::StateC: return mk::state(choose(ts.states()));
      case Strat::EventC: return mk::event(choose(ts.events()));
      case Strat::Nil: return mk::nil(a->as<FinTraceTy>()->src);
      case Strat::Step: return step(ctx, a, budget);
      case Strat::Witness: {
        std::vector<TermPtr> ws;
        for (const auto& e : ts.steps()) {
          TermPtr w = mk::witness(e.witness);
          if (alpha_eq(k_.nf(k_.infer(ctx, w)), a)) ws.push_back(w);
        }
        if (ws.empty()) return std::nullopt;
        return choose(ws);
      }
      case Strat::Lam: {
        const auto* pi = a->as<Pi>();
        std::string name = pi->binder == "_" ? "y" : pi->binder;
        auto body = gen(ctx.extended(name, pi->domain), pi->codomain, budget - 1);
        if (!body) return std::nullopt;
        return mk::lam(*body, name);
      }
      case Strat::TypeTerm: return type_term(ctx, budget);
      case Strat::Leaf: {
        const auto* u = a->as<Universe>();
        if (u->layer == Layer::Uc && u->level == 1) return mk::uc(0);
        if (u->layer == Layer::Type && u->level == 0) return mk::prop();
        if (u->layer == Layer::Type && u->level == 1) return mk::type(0);
        if (u->layer == Layer::Prop) return mk::bottom();
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  static TermPtr wrap_step_lams(TermPtr body) {
    for (const char* n : {"ih", "p", "s2", "e", "t", "s1"}) body = mk::lam(body, n);
    return body;
  }

  std::optional<TermPtr> fn_app(const Context& ctx, const TermPtr& a, std::size_t budget) {
    struct Cand {
      std::size_t var;
      TermPtr domain;
      TermPtr fixed;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      TermPtr t = var_type(ctx, i);
      const auto* pi = t->as<Pi>();
      if (!pi) continue;
      if (!mentions_var(pi->codomain, 0)) {
        if (alpha_eq(shift(pi->codomain, -1), a)) cands.push_back({i, pi->domain, nullptr});
      } else if (pi->domain->is<StateTy>()) {
        for (const auto& s : state_terms(ctx)) {
          if (alpha_eq(k_.nf(subst(pi->codomain, s)), a)) cands.push_back({i, pi->domain, s});
        }
      }
    }
    if (cands.empty()) return std::nullopt;
    const Cand& c = choose(cands);
    if (c.fixed) return mk::app(mk::var(c.var), c.fixed);
    auto arg = gen(ctx, c.domain, budget - 2);
    if (!arg) return std::nullopt;
    return mk::app(mk::var(c.var), *arg);
  }

  std::optional<TermPtr> elim(const Context& ctx, const TermPtr& a, std::size_t budget) {
    TermPtr trace_ty = choose(trace_types(ctx));
    const auto* ft = trace_ty->as<FinTraceTy>();
    TermPtr motive = mk::lam(mk::lam(shift(a, 2), "u"), "s");
    std::size_t fixed = 1 + motive->size + 6;
    if (fixed + 3 > budget) return std::nullopt;
    std::size_t rest = budget - fixed;
    std::size_t sc_budget = 1 + pick(rest - 2);
    auto sc = gen(ctx, trace_ty, sc_budget);
    if (!sc) return std::nullopt;
    rest -= (*sc)->size;
    if (rest < 2) return std::nullopt;
    std::size_t base_budget = 1 + pick(rest - 1);
    auto base = gen(ctx, a, base_budget);
    if (!base) return std::nullopt;
    rest -= (*base)->size;
    if (rest < 1) return std::nullopt;

    Context c = ctx;
    TermPtr st = k_.nf(trace_elim_step_type(motive, ft->src));
    for (const char* n : {"s1", "t", "e", "s2", "p", "ih"}) {
      const auto* pi = st->as<Pi>();
      c.push(n, pi->domain);
      st = pi->codomain;
    }
    auto body = gen(c, st, rest);
    if (!body) return std::nullopt;
    return mk::trace_elim(motive, *base, wrap_step_lams(*body), *sc);
  }

  std::optional<TermPtr> step(const Context& ctx, const TermPtr& a, std::size_t budget) {
    const auto* ft = a->as<FinTraceTy>();
    struct Provider {
      TermPtr src;
      TermPtr event;
      TermPtr witness;
    };
    std::vector<Provider> ps;
    for (const auto& e : k_.system().steps()) {
      if (alpha_eq(mk::state(e.dst), ft->dst)) ps.push_back({mk::state(e.src), mk::event(e.event), mk::witness(e.witness)});
    }
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      TermPtr t = var_type(ctx, i);
      if (const auto* sty = t->as<StepTy>()) {
        if (alpha_eq(sty->dst, ft->dst)) ps.push_back({sty->src, sty->event, mk::var(i)});
      }
    }
    if (ps.empty()) return std::nullopt;
    const Provider& p = choose(ps);
    std::size_t used = 1 + p.event->size + p.witness->size;
    if (used >= budget) return std::nullopt;
    auto prefix = gen(ctx, mk::fin_trace(ft->src, p.src), budget - used);
    if (!prefix) return std::nullopt;
    return mk::step(*prefix, p.event, p.witness);
  }

  std::optional<TermPtr> type_term(const Context& ctx, std::size_t budget) {
    tick();
    auto states = state_terms(ctx);
    std::size_t choice = pick(budget >= 3 ? 7 : 4);
    switch (choice) {
      case 0: return mk::nat_ty();
      case 1: return mk::state_ty();
      case 2: return mk::event_ty();
      case 3: return mk::inf_trace_ty();
      case 4: return mk::fin_trace(choose(states), choose(states));
      case 5: {
        if (budget < 4) return mk::fin_trace(choose(states), choose(states));
        return mk::step_ty(choose(states), choose(event_terms(ctx)), choose(states));
      }
      default: {
        std::size_t left = 1 + pick(budget - 2);
        auto dom = type_term(ctx, left);
        if (!dom) return std::nullopt;
        if ((*dom)->size + 2 > budget) return std::nullopt;
        auto cod = type_term(ctx.extended("z", *dom), budget - 1 - (*dom)->size);
        if (!cod) return std::nullopt;
        return mk::pi(*dom, *cod, "z");
      }
    }
  }

  const Kernel& k_;
  std::mt19937_64& rng_;
  std::size_t max_size_;
  std::size_t attempts_ = 0;
};

std::string ctx_name(std::size_t i) { return "h" + std::to_string(i); }

}  // namespace

Generator::Generator(const Kernel& kernel, GenConfig cfg) : k_(kernel), cfg_(cfg) { cfg_.validate(); }

std::mt19937_64 Generator::rng_for(std::size_t iteration, std::uint64_t salt) const {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

std::optional<TermPtr> Generator::term_of(std::mt19937_64& rng, const Context& ctx, const TermPtr& type,
                                          std::size_t budget) const {
  GenRun run(k_, rng, cfg_.maxTermSize);
  return run.gen(ctx, type, budget);
}

TermPtr Generator::entry_type(std::mt19937_64& rng, const Context& ctx) const {
  GenRun run(k_, rng, cfg_.maxTermSize);
  return k_.nf(run.entry_type(ctx));
}

Sample Generator::generate(std::size_t iteration, std::size_t min_ctx) const {
  auto rng = rng_for(iteration);
  GenRun run(k_, rng, cfg_.maxTermSize);
  std::size_t lo = std::min(min_ctx, cfg_.maxCtxLen);
  for (;;) {
    Context ctx;
    std::size_t len = lo + run.pick(cfg_.maxCtxLen - lo + 1);
    for (std::size_t j = 0; j < len; ++j) ctx.push(ctx_name(j), k_.nf(run.entry_type(ctx)));
    TermPtr type = k_.nf(run.target_type(ctx));
    std::size_t budget = 1 + run.pick(cfg_.maxTermSize);
    if (auto t = run.gen(ctx, type, budget)) return Sample{ctx, *t, type};
  }
}

Sample Generator::generate_closed_base(std::size_t iteration) const {
  auto rng = rng_for(iteration, 7);
  GenRun run(k_, rng, cfg_.maxTermSize);
  for (;;) {
    TermPtr type = k_.nf(run.closed_base_type());
    std::size_t budget = 1 + run.pick(cfg_.maxTermSize);
    if (auto t = run.gen(Context{}, type, budget)) return Sample{Context{}, *t, type};
  }
}

// --- suites ----------------------------------------------------------------------

namespace {

template <class F>
PropertyReport run_property(std::string name, const GenConfig& cfg, F per_iteration) {
  cfg.validate();
  std::vector<std::optional<std::string>> results(cfg.iterations);
  std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < cfg.iterations; i += workers) {
        try {
          results[i] = per_iteration(i);
        } catch (const std::exception& e) {
          results[i] = std::string("exception: ") + e.what();
        }
      }
    }));
  }
  for (auto& t : tasks) t.get();
  PropertyReport r{std::move(name), cfg.iterations, {}};
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i]) r.failures.push_back({i, *results[i]});
  }
  return r;
}

}  // namespace

PropertyReport run_weakening(const Kernel& k, const GenConfig& cfg) {
  Generator gen(k, cfg);
  return run_property("weakening", cfg, [&](std::size_t i) -> std::optional<std::string> {
    Sample s = gen.generate(i);
    auto rng = gen.rng_for(i, 1);
    std::size_t n = s.ctx.size();
    std::size_t p = std::uniform_int_distribution<std::size_t>(0, n)(rng);
    Context prefix = s.ctx.prefix(p);
    TermPtr b = gen.entry_type(rng, prefix);
    Context out = prefix;
    out.push("w", b);
    for (std::size_t j = p; j < n; ++j) {
      const auto& e = s.ctx.entries()[j];
      out.push(e.name, weaken(e.type, j - p));
    }
    TermPtr t = weaken(s.term, n - p);
    TermPtr a = weaken(s.type, n - p);
    if (k.accepts(out, t, a)) return std::nullopt;
    return "inserted w : " + pretty_print(b, prefix) + " at position " + std::to_string(p) + " into " +
           format_judgment(s.ctx, s.term, s.type);
  });
}

PropertyReport run_substitution(const Kernel& k, const GenConfig& cfg) {
  Generator gen(k, cfg);
  return run_property("substitution", cfg, [&](std::size_t i) -> std::optional<std::string> {
    for (std::uint64_t salt = 0;; ++salt) {
      auto rng = gen.rng_for(i, 100 + salt);
      GenRun run(k, rng, cfg.maxTermSize);
      Context prefix;
      std::size_t len = std::uniform_int_distribution<std::size_t>(0, cfg.maxCtxLen - 1)(rng);
      for (std::size_t j = 0; j < len; ++j) prefix.push(ctx_name(j), k.nf(run.entry_type(prefix)));
      TermPtr a = k.nf(run.entry_type(prefix));
      auto s = run.gen(prefix, a, 1 + std::uniform_int_distribution<std::size_t>(0, cfg.maxTermSize / 2)(rng));
      if (!s) continue;
      Context ctx = prefix.extended("x", a);
      TermPtr b = k.nf(run.target_type(ctx));
      auto t = run.gen(ctx, b, 1 + std::uniform_int_distribution<std::size_t>(0, cfg.maxTermSize - 1)(rng));
      if (!t) continue;
      if (!k.accepts(ctx, *t, b)) return "generated judgment rejected: " + format_judgment(ctx, *t, b);
      if (!k.accepts(prefix, *s, a)) return "generated substituend rejected: " + format_judgment(prefix, *s, a);
      TermPtr t2 = subst(*t, *s);
      TermPtr b2 = subst(b, *s);
      if (k.accepts(prefix, t2, b2)) return std::nullopt;
      return "x := " + pretty_print(*s, prefix) + " in " + format_judgment(ctx, *t, b);
    }
  });
}

std::vector<TermPtr> reduce_chain(const Kernel& k, const TermPtr& t, std::size_t limit) {
  std::vector<TermPtr> out;
  TermPtr cur = t;
  while (out.size() < limit) {
    auto next = k.reduce_step(cur);
    if (!next) break;
    cur = *next;
    out.push_back(cur);
  }
  return out;
}

PropertyReport run_subject_reduction(const Kernel& k, const GenConfig& cfg) {
  Generator gen(k, cfg);
  return run_property("subject reduction", cfg, [&](std::size_t i) -> std::optional<std::string> {
    Sample s = gen.generate(i);
    if (!k.accepts(s.ctx, s.term, s.type)) return "generated judgment rejected: " + format_judgment(s.ctx, s.term, s.type);
    auto chain = reduce_chain(k, s.term);
    for (std::size_t step = 0; step < chain.size(); ++step) {
      if (!k.accepts(s.ctx, chain[step], s.type)) {
        return "reduct " + std::to_string(step + 1) + " " + pretty_print(chain[step], s.ctx) + " of " +
               format_judgment(s.ctx, s.term, s.type);
      }
    }
    return std::nullopt;
  });
}

bool is_canonical_value(const TermPtr& t) {
  if (t->is<Zero>()) return true;
  if (const auto* s = t->as<Succ>()) return is_canonical_value(s->pred);
  if (const auto* n = t->as<Nil>()) return n->state->is<StateConst>();
  if (const auto* st = t->as<Step>()) {
    return st->event->is<EventConst>() && st->witness->is<StepWitness>() && is_canonical_value(st->prefix);
  }
  return false;
}

PropertyReport run_canonicity(const Kernel& k, const GenConfig& cfg) {
  Generator gen(k, cfg);
  return run_property("canonicity", cfg, [&](std::size_t i) -> std::optional<std::string> {
    Sample s = gen.generate_closed_base(i);
    if (!k.accepts(s.ctx, s.term, s.type)) return "generated judgment rejected: " + format_judgment(s.ctx, s.term, s.type);
    NormalForm nf = k.normalize(s.ctx, s.term);
    if (nf.is_canonical && is_canonical_value(nf.term)) return std::nullopt;
    return "normal form " + pretty_print(nf.term) + " of " + format_judgment(s.ctx, s.term, s.type);
  });
}

std::vector<PropertyReport> run_structural_suite(const Kernel& k, const GenConfig& cfg) {
  return {run_weakening(k, cfg), run_substitution(k, cfg), run_subject_reduction(k, cfg), run_canonicity(k, cfg)};
}

// --- enumeration -------------------------------------------------------------------

std::vector<TermPtr> search_alphabet(const Signature& sig) {
  std::vector<TermPtr> out = {mk::uc(0),    mk::type(0),  mk::prop(),          mk::state_ty(), mk::event_ty(),
                              mk::nat_ty(), mk::inf_trace_ty(), mk::bottom(), mk::zero()};
  for (const auto& s : sig.system->states()) out.push_back(mk::state(s));
  for (const auto& e : sig.system->events()) out.push_back(mk::event(e));
  for (const auto& st : sig.system->steps()) out.push_back(mk::witness(st.witness));
  for (const auto& c : sig.corecs) out.push_back(mk::corec(c));
  return out;
}

namespace {

enum class Cls { Universe, Pi, FinTrace, StepT, Nat, State, Event, InfTrace, Bottom, Neutral, Other };

Cls class_of(const TermPtr& t) {
  if (t->is<Universe>()) return Cls::Universe;
  if (t->is<Pi>()) return Cls::Pi;
  if (t->is<FinTraceTy>()) return Cls::FinTrace;
  if (t->is<StepTy>()) return Cls::StepT;
  if (t->is<NatTy>()) return Cls::Nat;
  if (t->is<StateTy>()) return Cls::State;
  if (t->is<EventTy>()) return Cls::Event;
  if (t->is<InfTraceTy>()) return Cls::InfTrace;
  if (t->is<Bottom>()) return Cls::Bottom;
  if (t->is<Var>() || t->is<App>() || t->is<TraceElim>()) return Cls::Neutral;
  return Cls::Other;
}

// What the caller needs from an inferred type. Class goals also admit neutral
// types, since substitution can still turn those into the wanted class.
struct Goal {
  enum Kind { Any, Class, Exact } kind = Any;
  Cls cls = Cls::Other;
  TermPtr type;
  std::string key;

  static Goal any() { return Goal{Any, Cls::Other, nullptr, "*"}; }
  static Goal of_class(Cls c) { return Goal{Class, c, nullptr, "c" + std::to_string(static_cast<int>(c))}; }
  static Goal exact(const TermPtr& t) { return Goal{Exact, class_of(t), t, "=" + dump(t)}; }

  /// Loosened goal for a body whose type is later instantiated.
  Goal loosened() const { return kind == Any ? any() : of_class(cls); }

  bool admits_form(Cls c) const { return kind == Any || cls == c; }
  bool accepts(const TermPtr& t) const {
    switch (kind) {
      case Any: return true;
      case Class: {
        Cls c = class_of(t);
        return c == cls || c == Cls::Neutral;
      }
      case Exact: return alpha_eq(t, type);
    }
    return false;
  }
};

// Enumeration scope. Entries bound by an enclosing redex are definitions:
// they are substituted away before the kernel sees a candidate, so `ctx`
// holds only the entries bound by Pi and Lam.
struct Scope {
  Context ctx;
  std::vector<std::optional<TermPtr>> values;  // per entry, outermost first
  std::string key;

  /// `t` with every defined entry replaced by its value, scoped in `ctx`.
  TermPtr close(TermPtr t) const {
    std::size_t removed = 0;
    for (std::size_t p = 0; p < values.size(); ++p) {
      if (!values[p]) continue;
      std::size_t size = values.size() - removed;
      t = subst_at(t, size - 1 - (p - removed), *values[p]);
      ++removed;
    }
    return t;
  }
};

struct Typed {
  TermPtr term;
  TermPtr type;  // normal form, scoped in Scope::ctx
};

}  // namespace

struct TermEnumerator::Impl {
  const Kernel& k;
  std::vector<Typed> leaves;
  std::unordered_map<std::string, std::vector<Typed>> infer_memo;
  std::unordered_map<std::string, std::vector<TermPtr>> check_memo;

  explicit Impl(const Kernel& kernel) : k(kernel) {
    for (const auto& l : search_alphabet(k.signature())) leaves.push_back({l, k.nf(k.infer(Context{}, l))});
  }

  Scope root(const Context& ctx) {
    Scope s;
    for (const auto& e : ctx.entries()) s = ext(s, e.type);
    return s;
  }

  /// Binds a variable of `type`, which is scoped in s.ctx.
  Scope ext(const Scope& s, const TermPtr& type) {
    TermPtr n = k.nf(type);
    Scope out{s.ctx.extended("x" + std::to_string(s.ctx.size()), n), s.values, s.key + "," + dump(n)};
    out.values.push_back(std::nullopt);
    return out;
  }

  /// Binds a variable standing for `value`, which is scoped in s.ctx.
  Scope define(const Scope& s, const TermPtr& value) {
    Scope out{s.ctx, s.values, s.key + ",=" + dump(value)};
    out.values.push_back(value);
    return out;
  }

  // Confirms a candidate with the kernel and records its normal type.
  void emit(std::vector<Typed>& out, const Scope& s, const TermPtr& t, const Goal& g) {
    TermPtr ty;
    try {
      ty = k.nf(k.infer(s.ctx, s.close(t)));
    } catch (const TypeError&) {
      return;
    }
    if (g.accepts(ty)) out.push_back({t, ty});
  }

  // Rebuilds (fun x => b) a1 rest for every way of reading t' = b rest↑ .
  template <class F>
  void lam_spines(const TermPtr& a1, const TermPtr& body_app, F&& f) {
    Spine sp = unspine(body_app);
    std::size_t r = sp.args.size();
    for (std::size_t take = 0; take <= r; ++take) {
      if (take > 0 && mentions_var(sp.args[r - take], 0)) break;
      std::vector<TermPtr> head_args(sp.args.begin(), sp.args.end() - static_cast<std::ptrdiff_t>(take));
      std::vector<TermPtr> all = {a1};
      for (std::size_t i = r - take; i < r; ++i) all.push_back(shift(sp.args[i], -1));
      f(respine(mk::lam(respine(sp.head, head_args), "x"), all));
    }
  }

  const std::vector<Typed>& infer(const Scope& s, std::size_t n, const Goal& g) {
    std::string key = s.key + "#" + g.key + "#" + std::to_string(n);
    if (auto it = infer_memo.find(key); it != infer_memo.end()) return it->second;
    std::vector<Typed> out;
    if (n == 1) {
      for (std::size_t i = 0; i < s.values.size(); ++i) emit(out, s, mk::var(i), g);
      for (const auto& l : leaves) {
        if (g.accepts(l.type)) out.push_back(l);
      }
      return infer_memo.emplace(key, std::move(out)).first->second;
    }

    if (g.admits_form(Cls::FinTrace)) {
      for (const auto& st : check(s, mk::state_ty(), n - 1)) emit(out, s, mk::nil(st), g);
    }
    if (g.admits_form(Cls::Nat)) {
      for (const auto& p : check(s, mk::nat_ty(), n - 1)) emit(out, s, mk::succ(p), g);
    }
    if (g.admits_form(Cls::Universe)) {
      for (std::size_t a = 1; a + 2 <= n; ++a) {
        for (const auto& dom : infer(s, a, Goal::of_class(Cls::Universe))) {
          if (!dom.type->is<Universe>()) continue;
          Scope inner = ext(s, s.close(dom.term));
          for (const auto& cod : infer(inner, n - 1 - a, Goal::of_class(Cls::Universe))) {
            if (cod.type->is<Universe>()) emit(out, s, mk::pi(dom.term, cod.term, "x"), g);
          }
        }
      }
      for (std::size_t a = 1; a + 2 <= n; ++a) {
        for (const auto& x : check(s, mk::state_ty(), a)) {
          for (const auto& y : check(s, mk::state_ty(), n - 1 - a)) emit(out, s, mk::fin_trace(x, y), g);
        }
      }
      for (std::size_t a = 1; a + 3 <= n; ++a) {
        for (std::size_t b = 1; a + b + 2 <= n; ++b) {
          std::size_t c = n - 1 - a - b;
          for (const auto& x : check(s, mk::state_ty(), a)) {
            for (const auto& e : check(s, mk::event_ty(), b)) {
              for (const auto& y : check(s, mk::state_ty(), c)) emit(out, s, mk::step_ty(x, e, y), g);
            }
          }
        }
      }
    }
    if (g.admits_form(Cls::FinTrace)) {
      for (std::size_t a = 1; a + 3 <= n; ++a) {
        for (std::size_t b = 1; a + b + 2 <= n; ++b) {
          std::size_t c = n - 1 - a - b;
          for (const auto& tau : infer(s, a, Goal::of_class(Cls::FinTrace))) {
            const auto* ft = tau.type->as<FinTraceTy>();
            if (!ft) continue;
            for (const auto& pi : infer(s, c, Goal::of_class(Cls::StepT))) {
              const auto* sty = pi.type->as<StepTy>();
              if (!sty || !alpha_eq(sty->src, ft->dst)) continue;
              for (const auto& e : check(s, mk::event_ty(), b)) {
                if (alpha_eq(k.nf(s.close(e)), sty->event)) emit(out, s, mk::step(tau.term, e, pi.term), g);
              }
            }
          }
        }
      }
    }

    // Application with a non-lambda head.
    for (std::size_t a = 1; a + 2 <= n; ++a) {
      for (const auto& fn : infer(s, a, Goal::of_class(Cls::Pi))) {
        const auto* pi = fn.type->as<Pi>();
        if (!pi || unspine(fn.term).head->is<Lam>()) continue;
        for (const auto& arg : check(s, pi->domain, n - 1 - a)) emit(out, s, mk::app(fn.term, arg), g);
      }
    }
    // Lambda-headed spines: the body is enumerated with the binder defined
    // as the first argument, exactly as the kernel types the redex.
    for (std::size_t a = 1; a + 3 <= n; ++a) {
      for (const auto& a1 : infer(s, a, Goal::any())) {
        Scope inner = define(s, s.close(a1.term));
        for (const auto& body : infer(inner, n - 2 - a, g)) {
          lam_spines(a1.term, body.term, [&](const TermPtr& t) { emit(out, s, t, g); });
        }
      }
    }
    // Trace eliminator.
    if (n >= 5) {
      for (std::size_t d = 1; d + 4 <= n; ++d) {
        for (const auto& tau : infer(s, d, Goal::of_class(Cls::FinTrace))) {
          const auto* ft = tau.type->as<FinTraceTy>();
          if (!ft) continue;
          std::size_t rest = n - 1 - d;
          for (std::size_t pm = 1; pm + 2 <= rest; ++pm) {
            for (const auto& motive : motives(s, ft->src, pm)) {
              TermPtr closed = s.close(motive);
              TermPtr base_ty = k.nf(mk::apps(closed, {ft->src, mk::nil(ft->src)}));
              TermPtr step_ty = k.nf(trace_elim_step_type(closed, ft->src));
              for (std::size_t b = 1; pm + b + 1 <= rest; ++b) {
                const auto& bases = check(s, base_ty, b);
                if (bases.empty()) continue;
                for (const auto& sc : check(s, step_ty, rest - pm - b)) {
                  for (const auto& base : bases) emit(out, s, mk::trace_elim(motive, base, sc, tau.term), g);
                }
              }
            }
          }
        }
      }
    }
    return infer_memo.emplace(key, std::move(out)).first->second;
  }

  // Motives over traces from `src` (scoped in s.ctx), mirroring the kernel's
  // motive check: up to two leading lambdas, the rest synthesized.
  std::vector<TermPtr> motives(const Scope& s, const TermPtr& src, std::size_t n) {
    std::vector<TermPtr> out;
    Scope one = ext(s, mk::state_ty());
    TermPtr trace_dom = k.nf(mk::fin_trace(weaken(src), mk::var(0)));
    if (n >= 3) {
      Scope two = ext(one, trace_dom);
      for (const auto& body : infer(two, n - 2, Goal::of_class(Cls::Universe))) {
        if (body.type->is<Universe>()) out.push_back(mk::lam(mk::lam(body.term, "u"), "s"));
      }
    }
    if (n >= 2) {
      for (const auto& body : infer(one, n - 1, Goal::of_class(Cls::Pi))) {
        const auto* pi = body.type->as<Pi>();
        if (pi && alpha_eq(pi->domain, trace_dom) && pi->codomain->is<Universe>()) {
          out.push_back(mk::lam(body.term, "s"));
        }
      }
    }
    for (const auto& p : infer(s, n, Goal::of_class(Cls::Pi))) {
      const auto* p1 = p.type->as<Pi>();
      if (!p1 || !p1->domain->is<StateTy>()) continue;
      const auto* p2 = p1->codomain->as<Pi>();
      if (p2 && alpha_eq(p2->domain, trace_dom) && p2->codomain->is<Universe>()) out.push_back(p.term);
    }
    return out;
  }

  /// Terms t of size n with s.close(t) checking against `type` (scoped in s.ctx).
  const std::vector<TermPtr>& check(const Scope& s, const TermPtr& type, std::size_t n) {
    TermPtr a = k.nf(type);
    std::string key = s.key + "#" + dump(a) + "#" + std::to_string(n);
    if (auto it = check_memo.find(key); it != check_memo.end()) return it->second;
    std::vector<TermPtr> out;
    if (const auto* pi = a->as<Pi>(); pi && n >= 2) {
      Scope inner = ext(s, pi->domain);
      for (const auto& body : check(inner, pi->codomain, n - 1)) out.push_back(mk::lam(body, "x"));
    }
    for (std::size_t j = 1; j + 3 <= n; ++j) {
      for (const auto& a1 : infer(s, j, Goal::any())) {
        Scope inner = define(s, s.close(a1.term));
        for (const auto& body : check(inner, a, n - 2 - j)) {
          lam_spines(a1.term, body, [&](const TermPtr& t) { out.push_back(t); });
        }
      }
    }
    std::set<std::string> seen;
    for (const auto& t : out) seen.insert(dump(t));
    for (const auto& t : infer(s, n, Goal::exact(a))) {
      if (seen.insert(dump(t.term)).second) out.push_back(t.term);
    }
    return check_memo.emplace(key, std::move(out)).first->second;
  }
};

TermEnumerator::TermEnumerator(const Kernel& k) : impl_(std::make_unique<Impl>(k)) {}
TermEnumerator::~TermEnumerator() = default;

std::vector<TermPtr> TermEnumerator::inferable(const Context& ctx, std::size_t n) {
  std::vector<TermPtr> out;
  for (const auto& t : impl_->infer(impl_->root(ctx), n, Goal::any())) out.push_back(t.term);
  return out;
}

std::vector<TermPtr> TermEnumerator::checkable(const Context& ctx, const TermPtr& type, std::size_t n) {
  return impl_->check(impl_->root(ctx), type, n);
}

std::size_t TermEnumerator::memo_entries() const { return impl_->infer_memo.size() + impl_->check_memo.size(); }

std::optional<TermPtr> consistency_search(const Kernel& k, std::size_t max_size, const TermPtr& target) {
  if (max_size > kMaxSearchSize) {
    throw std::invalid_argument("consistency search is bounded to size " + std::to_string(kMaxSearchSize));
  }
  TermEnumerator e(k);
  for (std::size_t n = 1; n <= max_size; ++n) {
    auto found = e.checkable(Context{}, target, n);
    if (found.empty()) continue;
    if (!k.accepts(Context{}, found.front(), target)) {
      throw InternalError("enumerator produced an ill-typed term: " + dump(found.front()));
    }
    return found.front();
  }
  return std::nullopt;
}

// --- raw enumeration -------------------------------------------------------------

namespace {

class RawEnum {
 public:
  explicit RawEnum(const std::vector<TermPtr>& alphabet) : alphabet_(alphabet) {}

  const std::vector<TermPtr>& at(std::size_t n, std::size_t depth) {
    auto key = std::make_pair(n, depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<TermPtr> out;
    if (n == 1) {
      out = alphabet_;
      for (std::size_t i = 0; i < depth; ++i) out.push_back(mk::var(i));
    } else {
      for (const auto& b : at(n - 1, depth + 1)) out.push_back(mk::lam(b, "x"));
      for (const auto& b : at(n - 1, depth)) {
        out.push_back(mk::nil(b));
        out.push_back(mk::succ(b));
      }
      for (std::size_t a = 1; a + 2 <= n; ++a) {
        for (const auto& x : at(a, depth)) {
          for (const auto& y : at(n - 1 - a, depth + 1)) out.push_back(mk::pi(x, y, "x"));
          for (const auto& y : at(n - 1 - a, depth)) {
            out.push_back(mk::app(x, y));
            out.push_back(mk::fin_trace(x, y));
          }
        }
      }
      for (std::size_t a = 1; a + 3 <= n; ++a) {
        for (std::size_t b = 1; a + b + 2 <= n; ++b) {
          std::size_t c = n - 1 - a - b;
          for (const auto& x : at(a, depth)) {
            for (const auto& y : at(b, depth)) {
              for (const auto& z : at(c, depth)) {
                out.push_back(mk::step(x, y, z));
                out.push_back(mk::step_ty(x, y, z));
              }
            }
          }
        }
      }
      for (std::size_t a = 1; a + 4 <= n; ++a) {
        for (std::size_t b = 1; a + b + 3 <= n; ++b) {
          for (std::size_t c = 1; a + b + c + 2 <= n; ++c) {
            std::size_t d = n - 1 - a - b - c;
            for (const auto& w : at(a, depth)) {
              for (const auto& x : at(b, depth)) {
                for (const auto& y : at(c, depth)) {
                  for (const auto& z : at(d, depth)) out.push_back(mk::trace_elim(w, x, y, z));
                }
              }
            }
          }
        }
      }
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

 private:
  std::vector<TermPtr> alphabet_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<TermPtr>> memo_;
};

}  // namespace

std::vector<TermPtr> enumerate_raw(const std::vector<TermPtr>& alphabet, std::size_t size) {
  if (size == 0) return {};
  RawEnum e(alphabet);
  return e.at(size, 0);
}

}  // namespace dekl
