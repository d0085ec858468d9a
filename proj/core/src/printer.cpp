#include "dekl/printer.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace dekl {

namespace {

constexpr std::array kKeywords = {
    "state",   "event",    "step",      "as",      "def",   "presheaf", "policy", "corec",      "Prop",
    "Type",    "Uc",       "FinTrace",  "InfTrace", "Step", "State",    "Event",  "Nat",        "nil",
    "trace_elim", "bot",   "zero",      "succ",    "fun",   "head",     "tail",   "predicate",  "evidence",
    "issue",   "revoke",   "from",      "depth",   "not",   "occurs",   "count",  "and",        "or",
};

enum Prec { kTerm = 0, kApp = 1, kAtom = 2 };

class Printer {
 public:
  Printer(const std::vector<std::string>& names, const std::set<std::string>& reserved)
      : scope_(names), reserved_(reserved) {}

  void print(std::ostringstream& out, const TermPtr& t, int prec) {
    using namespace node;
    if (const auto* v = t->as<Var>()) {
      if (v->index < scope_.size()) {
        out << scope_[scope_.size() - 1 - v->index];
      } else {
        out << '#' << v->index;
      }
    } else if (const auto* u = t->as<Universe>()) {
      switch (u->layer) {
        case Layer::Uc: out << "Uc(" << u->level << ')'; break;
        case Layer::Type: out << "Type(" << u->level << ')'; break;
        case Layer::Prop: out << "Prop"; break;
      }
    } else if (const auto* pi = t->as<Pi>()) {
      open(out, prec > kTerm);
      if (!mentions_var(pi->codomain, 0)) {
        print(out, pi->domain, kApp);
        out << " -> ";
        scope_.emplace_back();  // unreferenced slot keeps indices aligned
        print(out, pi->codomain, kTerm);
        scope_.pop_back();
      } else {
        std::string name = fresh(pi->binder);
        out << '(' << name << " : ";
        print(out, pi->domain, kTerm);
        out << ") -> ";
        scope_.push_back(name);
        print(out, pi->codomain, kTerm);
        scope_.pop_back();
      }
      close(out, prec > kTerm);
    } else if (const auto* lam = t->as<Lam>()) {
      open(out, prec > kTerm);
      std::string name = fresh(lam->binder);
      out << "fun " << name << " => ";
      scope_.push_back(name);
      print(out, lam->body, kTerm);
      scope_.pop_back();
      close(out, prec > kTerm);
    } else if (const auto* app = t->as<App>()) {
      open(out, prec > kApp);
      print(out, app->fn, kApp);
      out << ' ';
      print(out, app->arg, kAtom);
      close(out, prec > kApp);
    } else if (const auto* s = t->as<StateConst>()) {
      out << s->name;
    } else if (const auto* e = t->as<EventConst>()) {
      out << e->name;
    } else if (const auto* w = t->as<StepWitness>()) {
      out << w->name;
    } else if (const auto* c = t->as<CorecRef>()) {
      out << c->name;
    } else if (const auto* n = t->as<Nil>()) {
      call(out, "nil", {n->state});
    } else if (const auto* st = t->as<Step>()) {
      call(out, "step", {st->prefix, st->event, st->witness});
    } else if (const auto* el = t->as<TraceElim>()) {
      call(out, "trace_elim", {el->motive, el->base, el->step_case, el->scrutinee});
    } else if (const auto* ft = t->as<FinTraceTy>()) {
      call(out, "FinTrace", {ft->src, ft->dst});
    } else if (const auto* sty = t->as<StepTy>()) {
      call(out, "Step", {sty->src, sty->event, sty->dst});
    } else if (const auto* sc = t->as<Succ>()) {
      call(out, "succ", {sc->pred});
    } else if (t->is<StateTy>()) {
      out << "State";
    } else if (t->is<EventTy>()) {
      out << "Event";
    } else if (t->is<NatTy>()) {
      out << "Nat";
    } else if (t->is<Zero>()) {
      out << "zero";
    } else if (t->is<InfTraceTy>()) {
      out << "InfTrace";
    } else if (t->is<Bottom>()) {
      out << "bot";
    }
  }

 private:
  static void open(std::ostringstream& out, bool paren) {
    if (paren) out << '(';
  }
  static void close(std::ostringstream& out, bool paren) {
    if (paren) out << ')';
  }

  void call(std::ostringstream& out, const char* head, std::initializer_list<TermPtr> args) {
    out << head << '(';
    bool first = true;
    for (const auto& a : args) {
      if (!first) out << ", ";
      first = false;
      print(out, a, kTerm);
    }
    out << ')';
  }

  bool taken(const std::string& name) const {
    return is_keyword(name) || reserved_.count(name) ||
           std::find(scope_.begin(), scope_.end(), name) != scope_.end();
  }

  std::string fresh(const std::string& hint) {
    std::string base = hint;
    bool valid = !base.empty() && (std::isalpha(static_cast<unsigned char>(base[0])) || base[0] == '_') &&
                 base != "_";
    if (!valid) base = "x";
    if (!taken(base)) return base;
    for (std::size_t n = 1;; ++n) {
      std::string candidate = base + std::to_string(n);
      if (!taken(candidate)) return candidate;
    }
  }

  std::vector<std::string> scope_;
  const std::set<std::string>& reserved_;
};

}  // namespace

bool is_keyword(const std::string& word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::string pretty_print(const TermPtr& t, const std::vector<std::string>& names,
                         const std::set<std::string>& reserved) {
  std::ostringstream out;
  Printer(names, reserved).print(out, t, kTerm);
  return out.str();
}

std::string pretty_print(const TermPtr& t, const Context& ctx, const std::set<std::string>& reserved) {
  return pretty_print(t, ctx.names(), reserved);
}

}  // namespace dekl
