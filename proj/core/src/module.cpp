#include "dekl/module.hpp"

#include <sstream>

namespace dekl {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TransitionSystem ModuleAST::system() const {
  TransitionSystem ts;
  for (const auto& d : declarations) {
    if (const auto* s = std::get_if<StateDecl>(&d)) ts.add_state(s->name);
    if (const auto* e = std::get_if<EventDecl>(&d)) ts.add_event(e->name);
    if (const auto* st = std::get_if<StepDecl>(&d)) ts.add_step({st->src, st->event, st->dst, st->witness});
  }
  return ts;
}

std::vector<const CorecDecl*> ModuleAST::corecs() const {
  std::vector<const CorecDecl*> out;
  for (const auto& d : declarations) {
    if (const auto* c = std::get_if<CorecDecl>(&d)) out.push_back(c);
  }
  return out;
}

std::vector<const PresheafDecl*> ModuleAST::presheaves() const {
  std::vector<const PresheafDecl*> out;
  for (const auto& d : declarations) {
    if (const auto* p = std::get_if<PresheafDecl>(&d)) out.push_back(p);
  }
  return out;
}

const PresheafDecl* ModuleAST::find_presheaf(std::string_view name) const {
  for (const auto* p : presheaves()) {
    if (presheaf_name(p->spec) == name) return p;
  }
  return nullptr;
}

std::string ModuleAST::serialize() const {
  std::ostringstream out;
  for (const auto& d : declarations) {
    std::visit(
        overloaded{
            [&](const StateDecl& s) { out << "state " << s.name; },
            [&](const EventDecl& e) { out << "event " << e.name; },
            [&](const StepDecl& s) { out << "step " << s.src << ' ' << s.event << ' ' << s.dst << ' ' << s.witness; },
            [&](const DefDecl& d) { out << "def " << d.name << ' ' << dump(d.type) << ' ' << dump(d.body); },
            [&](const PolicyDecl& p) { out << "policy " << p.name << ' ' << format_policy(*p.expr); },
            [&](const PresheafDecl& p) {
              out << "presheaf ";
              std::visit(overloaded{
                             [&](const PredicateSpec& s) { out << s.name << " predicate " << format_policy(*s.expr); },
                             [&](const EvidenceSpec& s) {
                               out << s.name << " evidence " << s.issue_event << ' ' << s.revoke_event;
                             },
                             [&](const TabulatedSpec& s) { out << s.name << " table"; },
                         },
                         p.spec);
              out << " from";
              for (const auto& r : p.roots) out << ' ' << r;
              out << " depth " << p.depth;
            },
            [&](const CorecDecl& c) {
              out << "corec " << c.name << ' ' << (c.head ? dump(c.head) : "-") << ' '
                  << (c.tail_event ? dump(c.tail_event) : "-") << ' ' << c.tail_ref;
            },
        },
        d);
    out << '\n';
  }
  return out.str();
}

}  // namespace dekl
