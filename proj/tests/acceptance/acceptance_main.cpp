// One line per acceptance criterion: [PASS] or [FAIL], then a short detail.

#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "dekl/errors.hpp"
#include "dekl/metatheory.hpp"
#include "dekl/presheaf.hpp"
#include "dekl/printer.hpp"
#include "support.hpp"

using namespace dekl;
using namespace dekl::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

struct Corpus {
  std::string file;
  ModuleAST module;
  CheckedModule checked;
};

const std::vector<Corpus>& corpus() {
  static const std::vector<Corpus> all = [] {
    std::vector<Corpus> v;
    for (const auto& f : corpus_files()) {
      ModuleAST m = load(f);
      v.push_back({f, m, check_module(m)});
    }
    return v;
  }();
  return all;
}

std::vector<FinitePresheaf> corpus_presheaves() {
  std::vector<FinitePresheaf> out;
  for (const auto& c : corpus()) {
    for (const auto* d : c.module.presheaves()) {
      out.push_back(build_presheaf(d->spec, c.checked.system, d->roots, std::min<std::size_t>(d->depth, 4)));
    }
  }
  return out;
}

Path prefix_of(const TransitionSystem& ts, const Path& p, std::size_t n) { return prefix_path(ts, p, n); }

// --- AC1 ---------------------------------------------------------------------

Verdict ac1() {
  Verdict v;
  auto t0 = Clock::now();
  std::size_t pairs = 0;
  for (const auto& c : corpus()) {
    const TransitionSystem& ts = *c.checked.system;
    Kernel k(c.checked.signature);
    if (ts.states().size() > 8) v.fail(c.file + " has more than 8 states");
    for (const auto& a : ts.states()) {
      for (const auto& b : ts.states()) {
        ++pairs;
        auto w = witness_path(ts, a, b);
        bool typed = w && k.accepts(Context{}, reify(ts, *w), mk::fin_trace(mk::state(a), mk::state(b)));
        if (reachable(ts, a, b) != typed) v.fail(c.file + ": disagreement on " + a + " -> " + b);
      }
    }
  }
  double s = seconds_since(t0);
  if (s >= 5.0) v.fail("took " + std::to_string(s) + " s");
  if (v.ok) v.detail = std::to_string(pairs) + " state pairs agree in " + std::to_string(s) + " s";
  return v;
}

// --- AC2 ---------------------------------------------------------------------

Verdict ac2() {
  Verdict v;
  std::size_t paths = 0, terms = 0;
  for (const auto& c : corpus()) {
    const TransitionSystem& ts = *c.checked.system;
    Kernel k(c.checked.signature);
    for (const Path& p : enumerate_traces(ts, ts.states(), 5)) {
      ++paths;
      if (interp(ts, reify(ts, p)) != p) v.fail(c.file + ": interp(reify) differs on " + format_path(ts, p));
    }
    // every well-typed nil/step chain over the declared witnesses up to length 6
    std::function<void(const TermPtr&, std::size_t)> grow = [&](const TermPtr& t, std::size_t len) {
      ++terms;
      if (!alpha_eq(reify(ts, interp(ts, t)), t)) v.fail(c.file + ": reify(interp) differs on " + pretty_print(t));
      if (len == 6) return;
      for (const auto& e : ts.steps()) {
        TermPtr next = mk::step(t, mk::event(e.event), mk::witness(e.witness));
        try {
          k.infer(Context{}, next);
        } catch (const TypeError&) {
          continue;
        }
        grow(next, len + 1);
      }
    };
    for (const auto& s : ts.states()) grow(mk::nil(mk::state(s)), 0);
  }
  if (v.ok) v.detail = std::to_string(paths) + " paths, " + std::to_string(terms) + " trace terms round-trip";
  return v;
}

// --- AC3 ---------------------------------------------------------------------

Verdict ac3() {
  Verdict v;
  std::size_t checks = 0;
  for (const auto& p : corpus_presheaves()) {
    if (auto err = validate_presheaf(p)) v.fail(p.name + ": " + *err);
    const TransitionSystem& ts = *p.system;
    for (const auto& hi : p.base) {
      for (const auto& k : p.fiber(hi)) {
        ++checks;
        if (restrict(p, {hi, hi}, k) != k) v.fail(p.name + ": identity fails at " + format_path(ts, hi));
        for (std::size_t lo = 0; lo <= hi.length(); ++lo) {
          for (std::size_t mid = lo; mid <= hi.length(); ++mid) {
            ++checks;
            Path plo = prefix_of(ts, hi, lo), pmid = prefix_of(ts, hi, mid);
            if (restrict(p, {plo, hi}, k) != restrict(p, {plo, pmid}, restrict(p, {pmid, hi}, k))) {
              v.fail(p.name + ": composition fails under " + format_path(ts, hi));
            }
          }
        }
      }
    }
  }
  if (v.ok) v.detail = std::to_string(checks) + " pointwise law checks";
  return v;
}

// --- AC4 / AC5 ----------------------------------------------------------------

bool brute_force_nonmonotone(const FinitePresheaf& p) {
  for (const auto& whole : p.base) {
    for (std::size_t n = 0; n <= whole.length(); ++n) {
      Path prefix = prefix_path(*p.system, whole, n);
      std::set<Witness> image;
      for (const auto& k : p.fiber(whole)) image.insert(restrict(p, {prefix, whole}, k));
      for (const auto& k : p.fiber(prefix)) {
        if (!image.count(k)) return true;
      }
    }
  }
  return false;
}

NonMonotonicityReport report_for(const std::string& file, const std::string& name) {
  for (const auto& c : corpus()) {
    if (c.file != file) continue;
    const PresheafDecl* d = c.module.find_presheaf(name);
    return analyze_nonmonotonicity(build_presheaf(d->spec, c.checked.system, d->roots, d->depth));
  }
  throw std::logic_error("no such presheaf");
}

std::string last_edge(const std::string& file, const OrphanWitness& w) {
  for (const auto& c : corpus()) {
    if (c.file == file) {
      const StepEdge& e = c.checked.system->step(w.extension.whole.edges.back());
      return e.event + "/" + e.witness;
    }
  }
  return "";
}

Verdict ac4() {
  Verdict v;
  std::size_t n = 0;
  for (const auto& p : corpus_presheaves()) {
    ++n;
    bool nonmono = analyze_nonmonotonicity(p).verdict == NonMonotonicityReport::Verdict::NonMonotone;
    if (nonmono != brute_force_nonmonotone(p)) v.fail(p.name + ": verdict disagrees with brute force");
  }
  auto auth = report_for("credential.dekl", "Auth");
  if (auth.witnesses.empty()) v.fail("Auth reports no witness");
  for (const auto& w : auth.witnesses) {
    if (last_edge("credential.dekl", w) != "Revoke/revoke1") v.fail("Auth names " + last_edge("credential.dekl", w));
  }
  auto safe = report_for("monitoring.dekl", "Safe");
  if (safe.witnesses.empty()) v.fail("Safe reports no witness");
  for (const auto& w : safe.witnesses) {
    if (last_edge("monitoring.dekl", w) != "Viol/breach") v.fail("Safe names " + last_edge("monitoring.dekl", w));
  }
  if (v.ok) {
    v.detail = std::to_string(n) + " presheaves agree; Auth at Revoke/revoke1, Safe at Viol/breach";
  }
  return v;
}

Verdict ac5() {
  Verdict v;
  if (!report_for("monitoring.dekl", "Always").prefix_stable) v.fail("constant presheaf Always is not prefix-stable");
  if (report_for("credential.dekl", "Auth").prefix_stable) v.fail("Auth reported prefix-stable");
  std::size_t searched = 0;
  for (const auto& p : corpus_presheaves()) {
    if (!analyze_nonmonotonicity(p).prefix_stable) continue;
    for (const auto& whole : p.base) {
      for (std::size_t n = 0; n <= whole.length(); ++n) {
        Path prefix = prefix_path(*p.system, whole, n);
        for (const auto& k : p.fiber(prefix)) {
          ++searched;
          bool found = false;
          for (const auto& k2 : p.fiber(whole)) found = found || restrict(p, {prefix, whole}, k2) == k;
          if (!found) v.fail(p.name + ": no preimage for " + k);
        }
      }
    }
  }
  if (v.ok) v.detail = "Always stable, Auth not; " + std::to_string(searched) + " preimages found";
  return v;
}

// --- AC6 ---------------------------------------------------------------------

Verdict ac6() {
  Verdict v;
  Kernel k(credential_signature());
  GenConfig cfg;  // default seed, 1000 iterations
  auto first = run_structural_suite(k, cfg);
  auto second = run_structural_suite(k, cfg);
  std::ostringstream detail;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const auto& r = first[i];
    if (r.iterations != 1000) v.fail(r.name + " ran " + std::to_string(r.iterations) + " cases");
    if (!r.ok()) v.fail(r.name + ": " + r.failures.front().text);
    if (r.failures.size() != second[i].failures.size()) v.fail(r.name + " is not deterministic");
    detail << (i ? ", " : "") << r.name << " " << r.iterations << "/" << r.iterations;
  }
  // the generated cases themselves are reproducible
  Generator a(k, cfg), b(k, cfg);
  for (std::size_t i = 0; i < 1000; ++i) {
    if (dump(a.generate(i).term) != dump(b.generate(i).term)) {
      v.fail("generator differs at case " + std::to_string(i));
      break;
    }
  }
  if (v.ok) v.detail = detail.str();
  return v;
}

// --- AC7 ---------------------------------------------------------------------

Verdict ac7() {
  Verdict v;
  Kernel k(credential_signature());
  auto t0 = Clock::now();
  auto bottom = consistency_search(k, 8, mk::bottom());
  auto control = consistency_search(k, 8, mk::nat_ty());
  double s = seconds_since(t0);
  if (bottom) v.fail("bot inhabited by " + pretty_print(*bottom));
  if (!control || !alpha_eq(*control, mk::zero())) v.fail("control did not find zero : Nat");
  if (s >= 60.0) v.fail("took " + std::to_string(s) + " s");
  if (v.ok) v.detail = "no inhabitant of bot up to size 8, control finds zero, " + std::to_string(s) + " s";
  return v;
}

// --- AC8 ---------------------------------------------------------------------

Verdict ac8() {
  Verdict v;
  const Corpus& cred = corpus().front();
  Kernel k(cred.checked.signature);
  auto lams = [](TermPtr body, int n) {
    for (int i = 0; i < n; ++i) body = mk::lam(body);
    return body;
  };
  // Pi-Beta
  TermPtr beta = mk::app(mk::lam(mk::step(mk::nil(mk::var(0)), mk::event("Use"), mk::witness("use1"))), mk::state("S1"));
  if (!alpha_eq(k.nf(beta), mk::step(mk::nil(mk::state("S1")), mk::event("Use"), mk::witness("use1")))) {
    v.fail("Pi-Beta golden");
  }
  TermPtr motive = lams(mk::nat_ty(), 2);
  TermPtr sc = lams(mk::succ(mk::var(0)), 6);
  TermPtr base = mk::nat(5);
  // elim on nil
  if (!alpha_eq(k.nf(mk::trace_elim(motive, base, sc, mk::nil(mk::state("S0")))), base)) v.fail("elim-nil golden");
  // elim on step, one contraction and the full normal form
  TermPtr tau = mk::step(mk::nil(mk::state("S0")), mk::event("Issue"), mk::witness("issue0"));
  TermPtr el = mk::trace_elim(motive, base, sc, mk::step(tau, mk::event("Use"), mk::witness("use1")));
  TermPtr expected = mk::apps(sc, {mk::state("S1"), tau, mk::event("Use"), mk::state("S1"), mk::witness("use1"),
                                   mk::trace_elim(motive, base, sc, tau)});
  auto one = k.reduce_step(el);
  if (!one || !alpha_eq(*one, expected)) v.fail("elim-step contraction golden");
  if (!alpha_eq(k.nf(el), mk::nat(7))) v.fail("elim-step normal form golden");

  std::size_t defs = 0;
  for (const auto& c : corpus()) {
    Kernel kc(c.checked.signature);
    for (const auto& d : c.checked.defs) {
      ++defs;
      if (!alpha_eq(kc.nf(d.normal_body), d.normal_body)) v.fail(c.file + ": normalize not idempotent on " + d.name);
      TermPtr ty = kc.nf(d.type);
      if (!alpha_eq(kc.nf(ty), ty)) v.fail(c.file + ": normalize not idempotent on the type of " + d.name);
    }
  }
  if (v.ok) v.detail = "4 goldens exact, idempotent on " + std::to_string(defs) + " corpus definitions";
  return v;
}

// --- AC9 ---------------------------------------------------------------------

Verdict ac9() {
  Verdict v;
  std::size_t n = 0;
  for (const auto& c : corpus()) {
    NameTable names = names_of(c.module);
    for (const auto& d : c.module.declarations) {
      const auto* def = std::get_if<DefDecl>(&d);
      if (!def) continue;
      for (const TermPtr& t : {def->type, def->body}) {
        ++n;
        std::string text = pretty_print(t, std::vector<std::string>{}, names.all());
        if (!alpha_eq(parse_term(text, names), t)) v.fail(c.file + ": " + text);
      }
    }
  }
  Kernel k(credential_signature());
  Generator gen(k, GenConfig{});
  NameTable names = names_of(corpus().front().module);
  for (std::size_t i = 0; i < 1000; ++i) {
    Sample s = gen.generate(i);
    auto locals = s.ctx.names();
    ++n;
    std::string text = pretty_print(s.term, locals, names.all());
    try {
      if (!alpha_eq(parse_term(text, names, locals), s.term)) v.fail("generated #" + std::to_string(i) + ": " + text);
    } catch (const ParseError& e) {
      v.fail("generated #" + std::to_string(i) + " does not parse: " + e.what());
    }
  }
  if (v.ok) v.detail = std::to_string(n) + " terms round-trip";
  return v;
}

// --- AC10 --------------------------------------------------------------------

Verdict ac10() {
  Verdict v;
  std::size_t observed = 0;
  for (const auto& c : corpus()) {
    for (const auto* d : c.module.corecs()) {
      try {
        Observation o = observe_inftrace(c.module, d->name, 50);
        if (o.steps.size() != 50) v.fail(d->name + " observed " + std::to_string(o.steps.size()) + " steps");
        ++observed;
      } catch (const std::exception& e) {
        v.fail(d->name + ": " + e.what());
      }
    }
  }
  try {
    check_module(load("fixtures/unguarded.dekl"));
    v.fail("unguarded fixture accepted");
  } catch (const TypeError& e) {
    if (e.kind() != TypeErrorKind::UnguardedCorecursion) v.fail("unguarded fixture rejected as " + std::string(to_string(e.kind())));
  }
  if (v.ok) v.detail = std::to_string(observed) + " corecs observed to depth 50; unguarded fixture rejected";
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"AC1 trace correspondence", ac1}, {"AC2 adequacy round trip", ac2}, {"AC3 functor laws", ac3},
      {"AC4 non-monotonicity", ac4},     {"AC5 prefix stability", ac5},    {"AC6 structural metatheory", ac6},
      {"AC7 bounded consistency", ac7},  {"AC8 computation rules", ac8},   {"AC9 parser round trip", ac9},
      {"AC10 guardedness", ac10},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failed += !v.ok;
    std::cout << (v.ok ? "[PASS] " : "[FAIL] ") << name << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
