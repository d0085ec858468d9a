#include "dekl/presheaf.hpp"

#include <algorithm>
#include <set>

#include "dekl/errors.hpp"

namespace dekl {

PolicyPtr PolicyExpr::occurs(std::string event) {
  return std::make_shared<const PolicyExpr>(PolicyExpr{Kind::Occurs, std::move(event), 0, nullptr, nullptr});
}
PolicyPtr PolicyExpr::count_at_least(std::string event, std::size_t n) {
  return std::make_shared<const PolicyExpr>(PolicyExpr{Kind::CountAtLeast, std::move(event), n, nullptr, nullptr});
}
PolicyPtr PolicyExpr::negate(PolicyPtr p) {
  return std::make_shared<const PolicyExpr>(PolicyExpr{Kind::Not, {}, 0, std::move(p), nullptr});
}
PolicyPtr PolicyExpr::both(PolicyPtr a, PolicyPtr b) {
  return std::make_shared<const PolicyExpr>(PolicyExpr{Kind::And, {}, 0, std::move(a), std::move(b)});
}
PolicyPtr PolicyExpr::either(PolicyPtr a, PolicyPtr b) {
  return std::make_shared<const PolicyExpr>(PolicyExpr{Kind::Or, {}, 0, std::move(a), std::move(b)});
}

namespace {

std::size_t count_event(const TransitionSystem& ts, const std::string& event, const Path& p) {
  return static_cast<std::size_t>(
      std::count_if(p.edges.begin(), p.edges.end(), [&](std::size_t e) { return ts.step(e).event == event; }));
}

}  // namespace

bool eval_policy(const TransitionSystem& ts, const PolicyExpr& e, const Path& p) {
  switch (e.kind) {
    case PolicyExpr::Kind::Occurs: return count_event(ts, e.event, p) > 0;
    case PolicyExpr::Kind::CountAtLeast: return count_event(ts, e.event, p) >= e.count;
    case PolicyExpr::Kind::Not: return !eval_policy(ts, *e.lhs, p);
    case PolicyExpr::Kind::And: return eval_policy(ts, *e.lhs, p) && eval_policy(ts, *e.rhs, p);
    case PolicyExpr::Kind::Or: return eval_policy(ts, *e.lhs, p) || eval_policy(ts, *e.rhs, p);
  }
  return false;
}

std::string format_policy(const PolicyExpr& e) {
  switch (e.kind) {
    case PolicyExpr::Kind::Occurs: return "occurs(" + e.event + ")";
    case PolicyExpr::Kind::CountAtLeast: return "count(" + e.event + ") >= " + std::to_string(e.count);
    case PolicyExpr::Kind::Not: return "not " + format_policy(*e.lhs);
    case PolicyExpr::Kind::And: return "and(" + format_policy(*e.lhs) + ", " + format_policy(*e.rhs) + ")";
    case PolicyExpr::Kind::Or: return "or(" + format_policy(*e.lhs) + ", " + format_policy(*e.rhs) + ")";
  }
  return {};
}

std::vector<std::string> policy_events(const PolicyExpr& e) {
  std::vector<std::string> out;
  auto add = [&](const std::string& ev) {
    if (std::find(out.begin(), out.end(), ev) == out.end()) out.push_back(ev);
  };
  auto walk = [&](auto& self, const PolicyExpr& x) -> void {
    if (!x.event.empty()) add(x.event);
    if (x.lhs) self(self, *x.lhs);
    if (x.rhs) self(self, *x.rhs);
  };
  walk(walk, e);
  return out;
}

const std::string& presheaf_name(const PresheafSpec& spec) {
  return std::visit([](const auto& s) -> const std::string& { return s.name; }, spec);
}

std::optional<std::size_t> FinitePresheaf::find(const Path& p) const {
  auto it = index.find(p);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

const std::vector<Witness>& FinitePresheaf::fiber(const Path& p) const {
  auto i = find(p);
  if (!i) throw SemanticError("trace '" + format_path(*system, p) + "' is outside the base of '" + name + "'");
  return fibers[*i];
}

bool FinitePresheaf::in_fiber(std::size_t i, const Witness& k) const {
  return std::find(fibers[i].begin(), fibers[i].end(), k) != fibers[i].end();
}

std::vector<std::size_t> live_records(const TransitionSystem& ts, const EvidenceSpec& spec, const Path& p) {
  std::vector<std::size_t> records;
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    const std::string& ev = ts.step(p.edges[i]).event;
    if (ev == spec.revoke_event) records.clear();
    if (ev == spec.issue_event) records.push_back(i + 1);
  }
  return records;
}

Witness format_record_set(const std::vector<std::size_t>& records) {
  Witness out = "{";
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i) out += ",";
    out += "rec@" + std::to_string(records[i]);
  }
  return out + "}";
}

namespace {

FinitePresheaf empty_presheaf(const std::string& name, std::shared_ptr<const TransitionSystem> ts,
                              const std::vector<std::string>& roots, std::size_t depth) {
  FinitePresheaf p;
  p.name = name;
  p.depth = depth;
  p.system = std::move(ts);
  p.base = enumerate_traces(*p.system, roots, depth);
  for (std::size_t i = 0; i < p.base.size(); ++i) p.index.emplace(p.base[i], i);
  p.parent.resize(p.base.size());
  p.fibers.resize(p.base.size());
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    const Path& t = p.base[i];
    if (t.length() > 0) p.parent[i] = p.index.at(prefix_path(*p.system, t, t.length() - 1));
  }
  return p;
}

std::string describe_extension(const FinitePresheaf& p, std::size_t prefix, std::size_t whole) {
  return "'" + format_path(*p.system, p.base[prefix]) + "' -> '" + format_path(*p.system, p.base[whole]) + "'";
}

void build_predicate(FinitePresheaf& p, const PredicateSpec& spec) {
  const TransitionSystem& ts = *p.system;
  for (const auto& ev : policy_events(*spec.expr)) {
    if (!ts.has_event(ev)) throw SemanticError("policy of '" + spec.name + "' references unknown event '" + ev + "'");
  }
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    if (eval_policy(ts, *spec.expr, p.base[i])) p.fibers[i] = {Witness(kPoint)};
  }
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    if (!p.parent[i]) continue;
    std::size_t up = *p.parent[i];
    if (p.fibers[i].empty()) {
      p.step_maps[i] = {};
      continue;
    }
    if (p.fibers[up].empty()) {
      throw SemanticError("predicate '" + spec.name + "' is not prefix-closed: extension " +
                          describe_extension(p, up, i) + " has fiber {∗} over an empty prefix fiber");
    }
    p.step_maps[i] = {{Witness(kPoint), Witness(kPoint)}};
  }
}

std::vector<std::vector<std::size_t>> subsets(const std::vector<std::size_t>& records) {
  std::vector<std::vector<std::size_t>> out;
  std::size_t n = records.size();
  if (n >= 20) throw SemanticError("evidence fiber too large to tabulate");
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t b = 0; b < n; ++b) {
      if (mask & (std::size_t{1} << b)) s.push_back(records[b]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void build_evidence(FinitePresheaf& p, const EvidenceSpec& spec) {
  const TransitionSystem& ts = *p.system;
  for (const auto& ev : {spec.issue_event, spec.revoke_event}) {
    if (!ts.has_event(ev)) throw SemanticError("evidence '" + spec.name + "' references unknown event '" + ev + "'");
  }
  std::vector<std::vector<std::size_t>> live(p.base.size());
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    live[i] = live_records(ts, spec, p.base[i]);
    for (const auto& s : subsets(live[i])) p.fibers[i].push_back(format_record_set(s));
  }
  // Convexity: a record live at τ and at τ'' is live at every τ' in between.
  for (std::size_t whole = 0; whole < p.base.size(); ++whole) {
    std::vector<std::size_t> chain;  // ancestors of `whole`, nearest first
    for (auto a = p.parent[whole]; a; a = p.parent[*a]) chain.push_back(*a);
    for (std::size_t lo = 0; lo < chain.size(); ++lo) {
      for (std::size_t mid = 0; mid < lo; ++mid) {
        for (std::size_t r : live[chain[lo]]) {
          bool at_whole = std::binary_search(live[whole].begin(), live[whole].end(), r);
          bool at_mid = std::binary_search(live[chain[mid]].begin(), live[chain[mid]].end(), r);
          if (at_whole && !at_mid) {
            throw SemanticError("evidence '" + spec.name + "' is not convex: rec@" + std::to_string(r) +
                                " is live at '" + format_path(ts, p.base[chain[lo]]) + "' and '" +
                                format_path(ts, p.base[whole]) + "' but not at '" +
                                format_path(ts, p.base[chain[mid]]) + "'");
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    if (!p.parent[i]) continue;
    const auto& keep = live[*p.parent[i]];
    RestrictionTable table;
    for (const auto& s : subsets(live[i])) {
      std::vector<std::size_t> image;
      std::set_intersection(s.begin(), s.end(), keep.begin(), keep.end(), std::back_inserter(image));
      table.emplace(format_record_set(s), format_record_set(image));
    }
    p.step_maps[i] = std::move(table);
  }
}

void build_tabulated(FinitePresheaf& p, const TabulatedSpec& spec) {
  for (const auto& [path, fiber] : spec.fibers) {
    auto i = p.find(path);
    if (!i) throw SemanticError("table '" + spec.name + "' has a fiber outside the base: " + format_path(*p.system, path));
    p.fibers[*i] = fiber;
  }
  for (const auto& [ext, table] : spec.maps) {
    auto lo = p.find(ext.prefix);
    auto hi = p.find(ext.whole);
    if (!lo || !hi || !is_extension(ext)) {
      throw SemanticError("table '" + spec.name + "' has a map for something that is not an extension in the base");
    }
    if (p.parent[*hi] == lo) {
      p.step_maps[*hi] = table;
    } else {
      p.extra_maps[{*lo, *hi}] = table;
    }
  }
}

// Composite of one-step tables from `whole` down to its ancestor `prefix`.
std::optional<Witness> restrict_chain(const FinitePresheaf& p, std::size_t prefix, std::size_t whole, Witness k) {
  std::size_t at = whole;
  while (at != prefix) {
    auto table = p.step_maps.find(at);
    if (table == p.step_maps.end()) return std::nullopt;
    auto hit = table->second.find(k);
    if (hit == table->second.end()) return std::nullopt;
    k = hit->second;
    if (!p.parent[at]) return std::nullopt;
    at = *p.parent[at];
  }
  return k;
}

// Declared table if there is one, else the one-step composite.
std::optional<Witness> restrict_any(const FinitePresheaf& p, std::size_t prefix, std::size_t whole, const Witness& k) {
  auto declared = p.extra_maps.find({prefix, whole});
  if (declared != p.extra_maps.end()) {
    auto hit = declared->second.find(k);
    if (hit == declared->second.end()) return std::nullopt;
    return hit->second;
  }
  return restrict_chain(p, prefix, whole, k);
}

std::size_t require_in_base(const FinitePresheaf& p, const Path& t) {
  auto i = p.find(t);
  if (!i) throw SemanticError("trace '" + format_path(*p.system, t) + "' is outside the base of '" + p.name + "'");
  return *i;
}

}  // namespace

FinitePresheaf build_presheaf(const PresheafSpec& spec, std::shared_ptr<const TransitionSystem> ts,
                              const std::vector<std::string>& roots, std::size_t depth) {
  if (depth < 1) throw SemanticError("presheaf depth must be at least 1");
  for (const auto& r : roots) {
    if (!ts->has_state(r)) throw SemanticError("presheaf root '" + r + "' is not a declared state");
  }
  FinitePresheaf p = empty_presheaf(presheaf_name(spec), std::move(ts), roots, depth);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PredicateSpec>) build_predicate(p, s);
        if constexpr (std::is_same_v<T, EvidenceSpec>) build_evidence(p, s);
        if constexpr (std::is_same_v<T, TabulatedSpec>) build_tabulated(p, s);
      },
      spec);
  return p;
}

std::optional<std::string> validate_presheaf(const FinitePresheaf& p) {
  // Totality of the generating tables.
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    if (!p.parent[i]) continue;
    std::size_t up = *p.parent[i];
    auto table = p.step_maps.find(i);
    for (const auto& k : p.fibers[i]) {
      if (table == p.step_maps.end() || !table->second.count(k)) {
        return "restriction along " + describe_extension(p, up, i) + " is undefined on witness '" + k + "'";
      }
      const Witness& image = table->second.at(k);
      if (!p.in_fiber(up, image)) {
        return "restriction along " + describe_extension(p, up, i) + " sends '" + k + "' to '" + image +
               "', which is not in the prefix fiber";
      }
    }
    if (table != p.step_maps.end()) {
      for (const auto& [k, v] : table->second) {
        if (!p.in_fiber(i, k)) {
          return "restriction along " + describe_extension(p, up, i) + " is given on '" + k +
                 "', which is not in the fiber";
        }
      }
    }
  }
  // Declared identity tables.
  for (const auto& [key, table] : p.extra_maps) {
    if (key.first != key.second) continue;
    for (const auto& k : p.fibers[key.first]) {
      auto hit = table.find(k);
      if (hit == table.end() || hit->second != k) {
        return "identity law fails at '" + format_path(*p.system, p.base[key.first]) + "' on witness '" + k + "'";
      }
    }
  }
  // Composition on every triple τ <= τ' <= τ'' of the base.
  for (std::size_t hi = 0; hi < p.base.size(); ++hi) {
    std::vector<std::size_t> chain{hi};  // hi and its ancestors, nearest first
    for (auto a = p.parent[hi]; a; a = p.parent[*a]) chain.push_back(*a);
    for (std::size_t lo_pos = 0; lo_pos < chain.size(); ++lo_pos) {
      for (std::size_t mid_pos = 0; mid_pos <= lo_pos; ++mid_pos) {
        std::size_t lo = chain[lo_pos];
        std::size_t mid = chain[mid_pos];
        for (const auto& k : p.fibers[hi]) {
          auto direct = restrict_any(p, lo, hi, k);
          auto upper = restrict_any(p, mid, hi, k);
          std::optional<Witness> twice = upper ? restrict_any(p, lo, mid, *upper) : std::nullopt;
          if (!direct || !twice || *direct != *twice) {
            return "composition law fails on triple ('" + format_path(*p.system, p.base[lo]) + "', '" +
                   format_path(*p.system, p.base[mid]) + "', '" + format_path(*p.system, p.base[hi]) +
                   "') at witness '" + k + "'";
          }
        }
      }
    }
  }
  return std::nullopt;
}

Witness restrict(const FinitePresheaf& p, const ExtensionMorphism& ext, const Witness& k) {
  if (!is_extension(ext)) throw SemanticError("not an extension");
  std::size_t lo = require_in_base(p, ext.prefix);
  std::size_t hi = require_in_base(p, ext.whole);
  if (!p.in_fiber(hi, k)) {
    throw SemanticError("witness '" + k + "' is not in the fiber over '" + format_path(*p.system, ext.whole) + "'");
  }
  auto out = restrict_chain(p, lo, hi, k);
  if (!out) throw SemanticError("restriction along the extension is not tabulated for '" + k + "'");
  return *out;
}

SurjectivityResult check_surjective(const FinitePresheaf& p, const ExtensionMorphism& ext) {
  std::set<Witness> image;
  for (const auto& k : p.fiber(ext.whole)) image.insert(restrict(p, ext, k));
  SurjectivityResult r;
  for (const auto& k : p.fiber(ext.prefix)) {
    if (!image.count(k)) r.orphans.push_back(k);
  }
  r.surjective = r.orphans.empty();
  return r;
}

std::string_view to_string(NonMonotonicityReport::Verdict v) {
  return v == NonMonotonicityReport::Verdict::NonMonotone ? "non-monotone" : "monotone-on-base";
}

NonMonotonicityReport analyze_nonmonotonicity(const FinitePresheaf& p) {
  NonMonotonicityReport report;
  report.presheaf = p.name;
  report.depth = p.depth;
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    if (!p.parent[i]) continue;
    ExtensionMorphism ext{p.base[*p.parent[i]], p.base[i]};
    auto r = check_surjective(p, ext);
    for (auto& k : r.orphans) report.witnesses.push_back({ext, std::move(k)});
  }
  report.prefix_stable = report.witnesses.empty();
  report.verdict = report.prefix_stable ? NonMonotonicityReport::Verdict::MonotoneOnBase
                                        : NonMonotonicityReport::Verdict::NonMonotone;
  return report;
}

std::optional<std::size_t> localize_index_shift(const FinitePresheaf& p, const Path& path, std::size_t prefix_len,
                                                const Witness& k) {
  const TransitionSystem& ts = *p.system;
  Path q = prefix_path(ts, path, prefix_len);
  std::size_t qi = require_in_base(p, q);
  if (!p.in_fiber(qi, k)) {
    throw SemanticError("witness '" + k + "' is not in the fiber over '" + format_path(ts, q) + "'");
  }
  for (std::size_t i = prefix_len + 1; i <= path.length(); ++i) {
    Path longer = prefix_path(ts, path, i);
    std::size_t li = require_in_base(p, longer);
    bool survives = false;
    for (const auto& k2 : p.fibers[li]) {
      if (restrict(p, {q, longer}, k2) == k) {
        survives = true;
        break;
      }
    }
    if (!survives) return i;
  }
  return std::nullopt;
}

}  // namespace dekl
