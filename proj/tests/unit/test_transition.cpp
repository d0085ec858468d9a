#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "dekl/errors.hpp"
#include "support.hpp"

using namespace dekl;
using namespace dekl::testing;

namespace {

TransitionSystem make_system(const std::string& text) { return parse_module(text).system(); }

TransitionSystem chain() { return make_system("state S0. state S1. state S2. state S3. event E. event F. step S0 -[E]-> S1 as w01. step S1 -[F]-> S2 as w12."); }

// Two shortest routes A -> D; the one through C is declared first.
TransitionSystem diamond() {
  return make_system(
      "state A. state B. state C. state D. event X.\n"
      "step B -[X]-> D as bd. step A -[X]-> C as ac. step A -[X]-> B as ab. step C -[X]-> D as cd.");
}

// Floyd-Warshall transitive closure, independent of the BFS under test.
std::vector<std::vector<bool>> closure(const TransitionSystem& ts) {
  std::size_t n = ts.states().size();
  auto idx = [&](const std::string& s) {
    return static_cast<std::size_t>(std::find(ts.states().begin(), ts.states().end(), s) - ts.states().begin());
  };
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& e : ts.steps()) r[idx(e.src)][idx(e.dst)] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

std::vector<TransitionSystem> systems() {
  std::vector<TransitionSystem> out;
  for (const auto& f : corpus_files()) out.push_back(load(f).system());
  out.push_back(chain());
  out.push_back(diamond());
  return out;
}

}  // namespace

TEST(ValidateSystem, Examples) {
  EXPECT_FALSE(validate_system(TransitionSystem{}).has_value());
  EXPECT_FALSE(validate_system(chain()).has_value());

  TransitionSystem undeclared;
  undeclared.add_state("S0");
  undeclared.add_event("E");
  undeclared.add_step({"S0", "E", "S9", "w"});
  auto err = validate_system(undeclared);
  ASSERT_TRUE(err.has_value());
  EXPECT_NE(err->find("S9"), std::string::npos) << *err;

  TransitionSystem dup = chain();
  dup.add_step({"S2", "E", "S3", "w01"});
  err = validate_system(dup);
  ASSERT_TRUE(err.has_value());
  EXPECT_NE(err->find("w01"), std::string::npos) << *err;

  TransitionSystem triple = chain();
  triple.add_step({"S0", "E", "S1", "other"});
  EXPECT_TRUE(validate_system(triple).has_value());

  TransitionSystem event;
  event.add_state("S0");
  event.add_step({"S0", "Q", "S0", "w"});
  EXPECT_TRUE(validate_system(event).has_value());
}

TEST(Paths, IdentityAndUnits) {
  TransitionSystem ts = chain();
  Path id = identity_path(ts, "S0");
  EXPECT_EQ(id.src, "S0");
  EXPECT_EQ(id.dst, "S0");
  EXPECT_TRUE(id.edges.empty());
  Path p = edge_path(ts, 0);
  EXPECT_EQ(concat(identity_path(ts, "S0"), p), p);
  EXPECT_EQ(concat(p, identity_path(ts, p.dst)), p);
  EXPECT_THROW(identity_path(ts, "S9"), SemanticError);
}

TEST(Paths, ConcatChains) {
  TransitionSystem ts = chain();
  Path p = concat(edge_path(ts, 0), edge_path(ts, 1));
  EXPECT_EQ(p.src, "S0");
  EXPECT_EQ(p.dst, "S2");
  EXPECT_EQ(p.length(), 2u);
  EXPECT_TRUE(is_valid_path(ts, p));
  EXPECT_THROW(concat(edge_path(ts, 1), edge_path(ts, 0)), SemanticError);
}

TEST(Paths, PrefixPath) {
  TransitionSystem ts = load("credential.dekl").system();
  Path p = enumerate_traces(ts, {"S0"}, 3).back();
  EXPECT_EQ(prefix_path(ts, p, 0), identity_path(ts, "S0"));
  EXPECT_EQ(prefix_path(ts, p, p.length()), p);
  EXPECT_EQ(prefix_path(ts, p, 1).dst, "S1");
  EXPECT_THROW(prefix_path(ts, p, 4), SemanticError);
}

TEST(Paths, ConcatIsAssociative) {
  std::mt19937_64 rng(3);
  TransitionSystem ts = load("monitoring.dekl").system();
  auto all = enumerate_traces(ts, ts.states(), 3);
  auto pick = [&](const std::string& src) {
    std::vector<const Path*> c;
    for (const auto& p : all)
      if (p.src == src) c.push_back(&p);
    return *c[std::uniform_int_distribution<std::size_t>(0, c.size() - 1)(rng)];
  };
  for (int i = 0; i < 500; ++i) {
    Path p = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
    Path q = pick(p.dst);
    Path r = pick(q.dst);
    Path left = concat(concat(p, q), r);
    ASSERT_EQ(left, concat(p, concat(q, r)));
    ASSERT_EQ(left.length(), p.length() + q.length() + r.length());
    ASSERT_TRUE(is_valid_path(ts, left));
  }
}

TEST(Reachable, Examples) {
  TransitionSystem ts = chain();
  EXPECT_TRUE(reachable(ts, "S0", "S0"));
  EXPECT_TRUE(reachable(ts, "S0", "S2"));
  EXPECT_FALSE(reachable(ts, "S0", "S3"));
  EXPECT_FALSE(reachable(ts, "S2", "S0"));
  EXPECT_THROW(reachable(ts, "S0", "nope"), SemanticError);
}

TEST(Reachable, AgreesWithTransitiveClosure) {
  for (const auto& ts : systems()) {
    auto r = closure(ts);
    for (std::size_t i = 0; i < ts.states().size(); ++i) {
      for (std::size_t j = 0; j < ts.states().size(); ++j) {
        const auto& a = ts.states()[i];
        const auto& b = ts.states()[j];
        EXPECT_EQ(reachable(ts, a, b), r[i][j]) << a << " " << b;
        auto w = witness_path(ts, a, b);
        EXPECT_EQ(w.has_value(), r[i][j]);
        if (w) {
          EXPECT_TRUE(is_valid_path(ts, *w));
          EXPECT_EQ(w->src, a);
          EXPECT_EQ(w->dst, b);
        }
      }
    }
  }
}

TEST(WitnessPath, Examples) {
  TransitionSystem ts = chain();
  EXPECT_EQ(*witness_path(ts, "S0", "S0"), identity_path(ts, "S0"));
  Path two = *witness_path(ts, "S0", "S2");
  EXPECT_EQ(two.edges, (std::vector<std::size_t>{0, 1}));
  EXPECT_FALSE(witness_path(ts, "S0", "S3").has_value());
}

TEST(WitnessPath, DiamondTieBreaksByDeclarationOrder) {
  TransitionSystem ts = diamond();
  Path p = *witness_path(ts, "A", "D");
  EXPECT_EQ(format_path(ts, p), "A -[X/ac]-> C -[X/cd]-> D");
}

TEST(WitnessPath, IsShortest) {
  for (const auto& ts : systems()) {
    auto all = enumerate_traces(ts, ts.states(), 4);
    for (const auto& a : ts.states()) {
      for (const auto& b : ts.states()) {
        auto w = witness_path(ts, a, b);
        if (!w || w->length() > 3) continue;
        for (const auto& p : all) {
          if (p.src == a && p.dst == b) {
            ASSERT_LE(w->length(), p.length());
            if (p.length() == w->length()) ASSERT_LE(w->edges, p.edges);
          }
        }
      }
    }
  }
}

TEST(Interp, Examples) {
  TransitionSystem ts = chain();
  EXPECT_EQ(interp(ts, mk::nil(S("S0"))), identity_path(ts, "S0"));
  Path one = interp(ts, mk::step(mk::nil(S("S0")), E("E"), W("w01")));
  EXPECT_EQ(one, edge_path(ts, 0));
  EXPECT_THROW(interp(ts, mk::step(mk::nil(S("S1")), E("E"), W("w01"))), SemanticError);
  EXPECT_THROW(interp(ts, mk::app(mk::lam(mk::var(0)), mk::nil(S("S0")))), SemanticError);
}

TEST(Interp, FourStepCorpusTrace) {
  ModuleAST m = load("credential.dekl");
  CheckedModule c = check_module(m);
  Kernel k(c.signature);
  const TransitionSystem& ts = *c.system;
  TermPtr t = k.nf(parse_term("step(revoked, Revoke, revoke1)", names_of(m)));
  // revoked already ends in S2; the extension is ill-typed and rejected
  EXPECT_THROW(interp(ts, t), SemanticError);
  TermPtr four = k.nf(parse_term("revoked", names_of(m)));
  Path p = interp(ts, four);
  EXPECT_EQ(p.src, "S0");
  EXPECT_EQ(p.dst, "S2");
  EXPECT_EQ(p.edges, (std::vector<std::size_t>{0, 1, 1, 2}));
}

TEST(Reify, Examples) {
  TransitionSystem ts = chain();
  EXPECT_TRUE(alpha_eq(reify(ts, identity_path(ts, "S0")), mk::nil(S("S0"))));
  EXPECT_TRUE(alpha_eq(reify(ts, edge_path(ts, 0)), mk::step(mk::nil(S("S0")), E("E"), W("w01"))));
}

TEST(Adequacy, InterpOfReifyIsIdentity) {
  for (const auto& ts : systems()) {
    Signature sig;
    sig.system = std::make_shared<TransitionSystem>(ts);
    Kernel k(sig);
    for (const Path& p : enumerate_traces(ts, ts.states(), 5)) {
      TermPtr t = reify(ts, p);
      ASSERT_EQ(interp(ts, t), p);
      ASSERT_TRUE(k.accepts(Context{}, t, mk::fin_trace(S(p.src), S(p.dst))));
    }
  }
}

TEST(Adequacy, ReifyOfInterpIsIdentityOnAllNormalTraceTerms) {
  // Every nil/step chain over the declared witnesses, well-typed or not, up to length 6.
  for (const auto& ts : systems()) {
    Signature sig;
    sig.system = std::make_shared<TransitionSystem>(ts);
    Kernel k(sig);
    std::size_t typed = 0;
    std::function<void(const TermPtr&, std::size_t)> grow = [&](const TermPtr& t, std::size_t len) {
      bool ok = true;
      try {
        k.infer(Context{}, t);
      } catch (const TypeError&) {
        ok = false;
      }
      if (ok) {
        ++typed;
        ASSERT_TRUE(alpha_eq(reify(ts, interp(ts, t)), t)) << dump(t);
      } else {
        return;  // extensions of an ill-typed prefix are ill-typed
      }
      if (len == 6) return;
      for (const auto& e : ts.steps()) grow(mk::step(t, E(e.event), W(e.witness)), len + 1);
    };
    for (const auto& s : ts.states()) grow(mk::nil(S(s)), 0);
    EXPECT_EQ(typed, enumerate_traces(ts, ts.states(), 6).size());
  }
}

TEST(EnumerateTraces, Counts) {
  TransitionSystem loop = make_system("state S0. event E. step S0 -[E]-> S0 as l.");
  EXPECT_EQ(enumerate_traces(loop, {"S0"}, 0).size(), 1u);
  EXPECT_EQ(enumerate_traces(loop, {"S0"}, 3).size(), 4u);
  TransitionSystem branch = make_system("state S0. event E. event F. step S0 -[E]-> S0 as a. step S0 -[F]-> S0 as b.");
  EXPECT_EQ(enumerate_traces(branch, {"S0"}, 2).size(), 7u);
  EXPECT_EQ(enumerate_traces(chain(), chain().states(), 0).size(), 4u);
}

TEST(EnumerateTraces, OrderedAndComplete) {
  for (const auto& ts : systems()) {
    auto got = enumerate_traces(ts, ts.states(), 4);
    std::set<Path> seen(got.begin(), got.end());
    EXPECT_EQ(seen.size(), got.size());
    for (std::size_t i = 1; i < got.size(); ++i) EXPECT_LE(got[i - 1].length(), got[i].length());
    // completeness: every valid extension by one edge of a shorter path is present
    for (const auto& p : got) {
      if (p.length() == 4) continue;
      for (std::size_t e : ts.outgoing(p.dst)) EXPECT_TRUE(seen.count(concat(p, edge_path(ts, e))));
    }
  }
}

TEST(FormatPath, Rendering) {
  TransitionSystem ts = chain();
  EXPECT_EQ(format_path(ts, identity_path(ts, "S0")), "S0");
  EXPECT_EQ(format_path(ts, *witness_path(ts, "S0", "S2")), "S0 -[E/w01]-> S1 -[F/w12]-> S2");
}
