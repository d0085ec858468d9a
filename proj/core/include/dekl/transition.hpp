#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dekl/term.hpp"

namespace dekl {

struct StepEdge {
  std::string src;
  std::string event;
  std::string dst;
  std::string witness;
};

/// Declared states, events and labelled steps. Immutable once validated; the
/// kernel and every semantic analysis read it concurrently.
class TransitionSystem {
 public:
  TransitionSystem() = default;

  void add_state(std::string name);
  void add_event(std::string name);
  void add_step(StepEdge edge);

  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& events() const { return events_; }
  const std::vector<StepEdge>& steps() const { return steps_; }
  const StepEdge& step(std::size_t index) const { return steps_.at(index); }

  bool has_state(std::string_view name) const;
  bool has_event(std::string_view name) const;
  std::optional<std::size_t> find_witness(std::string_view witness) const;

  /// Indices of steps leaving `state`, in declaration order.
  const std::vector<std::size_t>& outgoing(std::string_view state) const;

 private:
  std::vector<std::string> states_;
  std::vector<std::string> events_;
  std::vector<StepEdge> steps_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> outgoing_;
  std::map<std::string, std::size_t, std::less<>> witness_index_;
};

/// Names the first violated constraint, or nullopt when the system is valid:
/// declared endpoints and events, unique witnesses, no duplicate triples.
std::optional<std::string> validate_system(const TransitionSystem& ts);

/// A morphism of the free trace category: a chain of steps (by index into
/// TransitionSystem::steps) from `src` to `dst`.
struct Path {
  std::string src;
  std::string dst;
  std::vector<std::size_t> edges;

  std::size_t length() const { return edges.size(); }
  auto operator<=>(const Path&) const = default;
};

/// `prefix` extends to `whole`: same source, prefix edges are an initial segment.
struct ExtensionMorphism {
  Path prefix;
  Path whole;

  std::size_t added() const { return whole.length() - prefix.length(); }
  auto operator<=>(const ExtensionMorphism&) const = default;
};

bool is_valid_path(const TransitionSystem& ts, const Path& p);
bool is_extension(const ExtensionMorphism& e);

Path identity_path(const TransitionSystem& ts, std::string_view state);
Path edge_path(const TransitionSystem& ts, std::size_t step_index);
Path concat(const Path& p, const Path& q);

/// The first `n` edges of `p`.
Path prefix_path(const TransitionSystem& ts, const Path& p, std::size_t n);

bool reachable(const TransitionSystem& ts, std::string_view from, std::string_view to);

/// Shortest path by breadth-first search; among equally short paths the one
/// whose edge-index sequence is lexicographically least (declaration order).
std::optional<Path> witness_path(const TransitionSystem& ts, std::string_view from, std::string_view to);

/// Closed normal trace term (nil / step over declared witnesses) to its path.
Path interp(const TransitionSystem& ts, const TermPtr& trace);

/// Path to the closed trace term that denotes it.
TermPtr reify(const TransitionSystem& ts, const Path& p);

/// Every path of length <= max_len starting at one of `roots`, ordered by
/// length, then root order, then edge indices lexicographically.
std::vector<Path> enumerate_traces(const TransitionSystem& ts, const std::vector<std::string>& roots,
                                   std::size_t max_len);

/// "S0 -[E/w01]-> S1 -[F/w12]-> S2"; the empty path prints as its state.
std::string format_path(const TransitionSystem& ts, const Path& p);

}  // namespace dekl
