#include "dekl/transition.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include "dekl/errors.hpp"

namespace dekl {

void TransitionSystem::add_state(std::string name) {
  outgoing_.try_emplace(name);
  states_.push_back(std::move(name));
}

void TransitionSystem::add_event(std::string name) { events_.push_back(std::move(name)); }

void TransitionSystem::add_step(StepEdge edge) {
  std::size_t index = steps_.size();
  outgoing_[edge.src].push_back(index);
  witness_index_.try_emplace(edge.witness, index);
  steps_.push_back(std::move(edge));
}

bool TransitionSystem::has_state(std::string_view name) const {
  return std::find(states_.begin(), states_.end(), name) != states_.end();
}

bool TransitionSystem::has_event(std::string_view name) const {
  return std::find(events_.begin(), events_.end(), name) != events_.end();
}

std::optional<std::size_t> TransitionSystem::find_witness(std::string_view witness) const {
  auto it = witness_index_.find(witness);
  if (it == witness_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::size_t>& TransitionSystem::outgoing(std::string_view state) const {
  static const std::vector<std::size_t> none;
  auto it = outgoing_.find(state);
  return it == outgoing_.end() ? none : it->second;
}

std::optional<std::string> validate_system(const TransitionSystem& ts) {
  std::set<std::string> seen_states;
  for (const auto& s : ts.states()) {
    if (!seen_states.insert(s).second) return "duplicate state '" + s + "'";
  }
  std::set<std::string> seen_events;
  for (const auto& e : ts.events()) {
    if (!seen_events.insert(e).second) return "duplicate event '" + e + "'";
  }
  std::set<std::string> witnesses;
  std::set<std::tuple<std::string, std::string, std::string>> triples;
  for (const auto& st : ts.steps()) {
    if (!seen_states.count(st.src)) return "step '" + st.witness + "' references undeclared state '" + st.src + "'";
    if (!seen_states.count(st.dst)) return "step '" + st.witness + "' references undeclared state '" + st.dst + "'";
    if (!seen_events.count(st.event)) {
      return "step '" + st.witness + "' references undeclared event '" + st.event + "'";
    }
    if (!witnesses.insert(st.witness).second) return "duplicate step witness '" + st.witness + "'";
    if (!triples.insert({st.src, st.event, st.dst}).second) {
      return "duplicate step " + st.src + " -[" + st.event + "]-> " + st.dst + " (witness '" + st.witness + "')";
    }
  }
  return std::nullopt;
}

bool is_valid_path(const TransitionSystem& ts, const Path& p) {
  if (!ts.has_state(p.src) || !ts.has_state(p.dst)) return false;
  std::string_view at = p.src;
  for (std::size_t e : p.edges) {
    if (e >= ts.steps().size() || ts.step(e).src != at) return false;
    at = ts.step(e).dst;
  }
  return at == p.dst;
}

bool is_extension(const ExtensionMorphism& e) {
  if (e.prefix.src != e.whole.src || e.prefix.length() > e.whole.length()) return false;
  return std::equal(e.prefix.edges.begin(), e.prefix.edges.end(), e.whole.edges.begin());
}

Path identity_path(const TransitionSystem& ts, std::string_view state) {
  if (!ts.has_state(state)) throw SemanticError("unknown state '" + std::string(state) + "'");
  return Path{std::string(state), std::string(state), {}};
}

Path edge_path(const TransitionSystem& ts, std::size_t step_index) {
  const StepEdge& e = ts.step(step_index);
  return Path{e.src, e.dst, {step_index}};
}

Path concat(const Path& p, const Path& q) {
  if (p.dst != q.src) {
    throw SemanticError("cannot compose paths: '" + p.dst + "' is not '" + q.src + "'");
  }
  Path out{p.src, q.dst, p.edges};
  out.edges.insert(out.edges.end(), q.edges.begin(), q.edges.end());
  return out;
}

Path prefix_path(const TransitionSystem& ts, const Path& p, std::size_t n) {
  if (n > p.length()) throw SemanticError("prefix longer than path");
  Path out{p.src, p.src, {p.edges.begin(), p.edges.begin() + static_cast<std::ptrdiff_t>(n)}};
  if (n > 0) out.dst = ts.step(out.edges.back()).dst;
  return out;
}

namespace {

void require_state(const TransitionSystem& ts, std::string_view s) {
  if (!ts.has_state(s)) throw SemanticError("unknown state '" + std::string(s) + "'");
}

}  // namespace

bool reachable(const TransitionSystem& ts, std::string_view from, std::string_view to) {
  require_state(ts, from);
  require_state(ts, to);
  std::set<std::string, std::less<>> visited{std::string(from)};
  std::deque<std::string> queue{std::string(from)};
  while (!queue.empty()) {
    std::string s = std::move(queue.front());
    queue.pop_front();
    if (s == to) return true;
    for (std::size_t e : ts.outgoing(s)) {
      const std::string& next = ts.step(e).dst;
      if (visited.insert(next).second) queue.push_back(next);
    }
  }
  return false;
}

std::optional<Path> witness_path(const TransitionSystem& ts, std::string_view from, std::string_view to) {
  require_state(ts, from);
  require_state(ts, to);
  // First discovery in FIFO order fixes the lexicographically least shortest path.
  std::map<std::string, std::size_t, std::less<>> parent_edge;
  std::set<std::string, std::less<>> visited{std::string(from)};
  std::deque<std::string> queue{std::string(from)};
  while (!queue.empty() && !visited.count(to)) {
    std::string s = std::move(queue.front());
    queue.pop_front();
    for (std::size_t e : ts.outgoing(s)) {
      const std::string& next = ts.step(e).dst;
      if (visited.insert(next).second) {
        parent_edge[next] = e;
        queue.push_back(next);
      }
    }
  }
  if (!visited.count(to)) return std::nullopt;
  Path p{std::string(from), std::string(to), {}};
  std::string at(to);
  while (at != from) {
    std::size_t e = parent_edge.at(at);
    p.edges.push_back(e);
    at = ts.step(e).src;
  }
  std::reverse(p.edges.begin(), p.edges.end());
  return p;
}

Path interp(const TransitionSystem& ts, const TermPtr& trace) {
  if (const auto* n = trace->as<node::Nil>()) {
    const auto* s = n->state->as<node::StateConst>();
    if (!s) throw SemanticError("interp: nil endpoint is not a state constant: " + dump(trace));
    return identity_path(ts, s->name);
  }
  if (const auto* st = trace->as<node::Step>()) {
    Path prefix = interp(ts, st->prefix);
    const auto* w = st->witness->as<node::StepWitness>();
    const auto* ev = st->event->as<node::EventConst>();
    if (!w || !ev) throw SemanticError("interp: step is not over a declared witness and event: " + dump(trace));
    auto index = ts.find_witness(w->name);
    if (!index) throw SemanticError("interp: unknown step witness '" + w->name + "'");
    const StepEdge& edge = ts.step(*index);
    if (edge.event != ev->name) {
      throw SemanticError("interp: witness '" + w->name + "' is labelled " + edge.event + ", not " + ev->name);
    }
    if (edge.src != prefix.dst) {
      throw SemanticError("interp: witness '" + w->name + "' starts at " + edge.src + ", trace ends at " + prefix.dst);
    }
    return concat(prefix, edge_path(ts, *index));
  }
  throw SemanticError("interp: not a normal closed trace term: " + dump(trace));
}

TermPtr reify(const TransitionSystem& ts, const Path& p) {
  TermPtr t = mk::nil(mk::state(p.src));
  for (std::size_t e : p.edges) {
    const StepEdge& edge = ts.step(e);
    t = mk::step(t, mk::event(edge.event), mk::witness(edge.witness));
  }
  return t;
}

std::vector<Path> enumerate_traces(const TransitionSystem& ts, const std::vector<std::string>& roots,
                                   std::size_t max_len) {
  std::vector<Path> out;
  std::vector<Path> frontier;
  std::set<std::string> seen_roots;
  for (const auto& r : roots) {
    if (!seen_roots.insert(r).second) continue;
    frontier.push_back(identity_path(ts, r));
  }
  for (std::size_t len = 0;; ++len) {
    out.insert(out.end(), frontier.begin(), frontier.end());
    if (len == max_len) break;
    std::vector<Path> next;
    for (const auto& p : frontier) {
      for (std::size_t e : ts.outgoing(p.dst)) {
        Path q = p;
        q.edges.push_back(e);
        q.dst = ts.step(e).dst;
        next.push_back(std::move(q));
      }
    }
    if (next.empty()) break;
    frontier = std::move(next);
  }
  return out;
}

std::string format_path(const TransitionSystem& ts, const Path& p) {
  std::string out = p.src;
  for (std::size_t e : p.edges) {
    const StepEdge& edge = ts.step(e);
    out += " -[" + edge.event + "/" + edge.witness + "]-> " + edge.dst;
  }
  return out;
}

}  // namespace dekl
