#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "support.hpp"

using namespace dekl;
using namespace dekl::testing;

TEST(AlphaEq, BinderNamesAreIrrelevant) {
  EXPECT_TRUE(alpha_eq(mk::lam(mk::var(0), "x"), mk::lam(mk::var(0), "y")));
  EXPECT_TRUE(alpha_eq(mk::pi(mk::state_ty(), mk::var(0), "a"), mk::pi(mk::state_ty(), mk::var(0), "b")));
}

TEST(AlphaEq, DistinctIndices) { EXPECT_FALSE(alpha_eq(mk::var(0), mk::var(1))); }

TEST(AlphaEq, SyntacticIdentity) { EXPECT_TRUE(alpha_eq(mk::nil(S("S0")), mk::nil(S("S0")))); }

TEST(AlphaEq, IsAnEquivalenceOnGeneratedTerms) {
  std::mt19937_64 rng(11);
  std::vector<TermPtr> ts;
  for (int i = 0; i < 300; ++i) ts.push_back(random_term(rng, 2, 1 + i % 6));
  for (const auto& a : ts) {
    ASSERT_TRUE(alpha_eq(a, a));
    for (const auto& b : ts) {
      ASSERT_EQ(alpha_eq(a, b), alpha_eq(b, a));
      if (!alpha_eq(a, b)) continue;
      for (const auto& c : ts) {
        if (alpha_eq(b, c)) ASSERT_TRUE(alpha_eq(a, c));
      }
    }
  }
}

TEST(Subst, IdentityBody) { EXPECT_TRUE(alpha_eq(subst(mk::var(0), mk::zero()), mk::zero())); }

TEST(Subst, IndexShiftBookkeeping) {
  TermPtr body = mk::app(mk::var(1), mk::var(0));
  EXPECT_TRUE(alpha_eq(subst(body, mk::zero()), mk::app(mk::var(0), mk::zero())));
}

TEST(Subst, UnderBinderShiftsTheSubstituend) {
  // (fun y => x y)[x := v3]  ==  fun y => v3' y  with v3 shifted past y
  TermPtr body = mk::lam(mk::app(mk::var(1), mk::var(0)));
  TermPtr got = subst(body, mk::var(3));
  EXPECT_TRUE(alpha_eq(got, mk::lam(mk::app(mk::var(4), mk::var(0)))));
}

TEST(Weaken, ClosedTermUnchanged) { EXPECT_TRUE(alpha_eq(weaken(mk::zero(), 0), mk::zero())); }

TEST(Weaken, ShiftsVariable) { EXPECT_TRUE(alpha_eq(weaken(mk::var(0), 0), mk::var(1))); }

TEST(Weaken, RespectsCutoff) {
  TermPtr t = mk::app(mk::var(0), mk::var(2));
  EXPECT_TRUE(alpha_eq(weaken(t, 1), mk::app(mk::var(0), mk::var(3))));
}

TEST(Weaken, SubstAfterWeakenIsIdentity) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    std::size_t depth = i % 4;
    TermPtr t = random_term(rng, depth, 1 + i % 12);
    TermPtr s = random_term(rng, depth, 1 + i % 5);
    ASSERT_TRUE(alpha_eq(subst(weaken(t, 0), s), t)) << dump(t);
  }
}

TEST(Scope, PreservedBySubstAndWeaken) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    std::size_t depth = i % 3;
    TermPtr body = random_term(rng, depth + 1, 1 + i % 10);
    TermPtr s = random_term(rng, depth, 1 + i % 4);
    ASSERT_TRUE(scope_valid(body, depth + 1));
    ASSERT_TRUE(scope_valid(subst(body, s), depth));
    ASSERT_TRUE(scope_valid(weaken(body, i % (depth + 2)), depth + 2));
  }
}

TEST(Scope, DetectsOutOfScopeIndex) {
  EXPECT_FALSE(scope_valid(mk::var(0), 0));
  EXPECT_TRUE(scope_valid(mk::lam(mk::var(0)), 0));
  EXPECT_FALSE(scope_valid(mk::lam(mk::var(1)), 0));
}

// --- named-variable oracle ------------------------------------------------------

namespace {

// A term with names instead of indices. `shape` keeps the node's own data;
// kids are in children() order with their binder counts.
struct Named {
  TermPtr shape;
  std::string name;  // variable name, or binder name for Pi/Lam
  std::vector<Named> kids;
  std::vector<std::size_t> binders;
};

bool is_binder(const TermPtr& t) { return t->is<node::Pi>() || t->is<node::Lam>(); }

void free_names(const Named& n, std::set<std::string>& bound, std::set<std::string>& out) {
  if (n.shape->is<node::Var>()) {
    if (!bound.count(n.name)) out.insert(n.name);
    return;
  }
  for (std::size_t i = 0; i < n.kids.size(); ++i) {
    bool adds = n.binders[i] > 0 && !bound.count(n.name);
    if (adds) bound.insert(n.name);
    free_names(n.kids[i], bound, out);
    if (adds) bound.erase(n.name);
  }
}

std::set<std::string> free_names(const Named& n) {
  std::set<std::string> bound, out;
  free_names(n, bound, out);
  return out;
}

// Binder names come from a tiny pool so they routinely coincide with the
// substituend's free names; a pool name is skipped only when it would
// capture a variable the body actually uses.
Named to_named(const TermPtr& t, std::vector<std::string>& stack, std::mt19937_64& rng) {
  if (const auto* v = t->as<node::Var>()) return Named{t, stack[stack.size() - 1 - v->index], {}, {}};
  Named n{t, "", {}, {}};
  if (is_binder(t)) {
    static const std::vector<std::string> pool = {"a", "f0", "f1", "x"};
    std::vector<std::string> avoid;
    for (std::size_t i = 0; i < stack.size(); ++i) {
      // names of outer binders referenced from below this binder
      for (const auto& c : children(*t)) {
        if (c.binders == 1 && mentions_var(*c.term, stack.size() - i)) avoid.push_back(stack[i]);
      }
    }
    std::string name = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    for (int k = 0; std::find(avoid.begin(), avoid.end(), name) != avoid.end(); ++k) name = "z" + std::to_string(k);
    n.name = name;
  }
  for (const auto& c : children(*t)) {
    if (c.binders) stack.push_back(n.name);
    n.kids.push_back(to_named(*c.term, stack, rng));
    if (c.binders) stack.pop_back();
    n.binders.push_back(c.binders);
  }
  return n;
}

int fresh_counter = 0;

Named rename(const Named& n, const std::string& from, const std::string& to) {
  if (n.shape->is<node::Var>()) return n.name == from ? Named{n.shape, to, {}, {}} : n;
  Named out = n;
  for (std::size_t i = 0; i < n.kids.size(); ++i) {
    if (n.binders[i] && n.name == from) continue;  // shadowed
    out.kids[i] = rename(n.kids[i], from, to);
  }
  return out;
}

Named named_subst(const Named& n, const std::string& x, const Named& s) {
  if (n.shape->is<node::Var>()) return n.name == x ? s : n;
  Named out = n;
  std::set<std::string> fv = free_names(s);
  if (is_binder(n.shape) && n.name != x && fv.count(n.name)) {
    std::string y = "r" + std::to_string(fresh_counter++);
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
      if (n.binders[i]) out.kids[i] = rename(n.kids[i], n.name, y);
    }
    out.name = y;
  }
  for (std::size_t i = 0; i < out.kids.size(); ++i) {
    if (out.binders[i] && out.name == x) continue;
    out.kids[i] = named_subst(out.kids[i], x, s);
  }
  return out;
}

TermPtr to_db(const Named& n, std::vector<std::string>& stack) {
  if (n.shape->is<node::Var>()) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      if (stack[stack.size() - 1 - i] == n.name) return mk::var(i);
    }
    ADD_FAILURE() << "unbound name " << n.name;
    return mk::var(999);
  }
  std::size_t k = 0;
  return map_children(n.shape, [&](const TermPtr&, std::size_t binders) {
    const Named& kid = n.kids[k++];
    if (binders) stack.push_back(n.name);
    TermPtr r = to_db(kid, stack);
    if (binders) stack.pop_back();
    return r;
  });
}

}  // namespace

TEST(Subst, AgreesWithNamedCaptureAvoidingOracle) {
  std::mt19937_64 rng(2024);
  int capturing = 0;
  for (int i = 0; i < 100; ++i) {
    std::size_t depth = 1 + i % 3;  // free variables f0 .. f(depth-1)
    std::vector<std::string> outer;
    for (std::size_t j = 0; j < depth; ++j) outer.push_back("f" + std::to_string(j));
    TermPtr body = random_term(rng, depth + 1, 4 + i % 10);
    TermPtr s = random_term(rng, depth, 1 + i % 4);

    std::vector<std::string> with_x = outer;
    with_x.push_back("x");
    Named nb = to_named(body, with_x, rng);
    std::vector<std::string> without_x = outer;
    Named ns = to_named(s, without_x, rng);
    for (const auto& f : free_names(ns)) {
      std::set<std::string> binders;
      std::function<void(const Named&)> walk = [&](const Named& n) {
        if (is_binder(n.shape)) binders.insert(n.name);
        for (const auto& kid : n.kids) walk(kid);
      };
      walk(nb);
      if (binders.count(f)) ++capturing;
    }

    Named result = named_subst(nb, "x", ns);
    std::vector<std::string> stack = outer;
    TermPtr oracle = to_db(result, stack);
    ASSERT_TRUE(alpha_eq(subst(body, s), oracle)) << "body " << dump(body) << " s " << dump(s);
  }
  EXPECT_GT(capturing, 0) << "oracle never exercised a capture-avoiding rename";
}

TEST(Spine, UnspineRespineRoundTrip) {
  TermPtr t = mk::apps(mk::var(2), {mk::zero(), mk::var(0), S("S1")});
  Spine sp = unspine(t);
  EXPECT_EQ(sp.args.size(), 3u);
  EXPECT_TRUE(alpha_eq(respine(sp.head, sp.args), t));
}

TEST(Context, LookupWeakensIntoFullContext) {
  Context ctx;
  ctx.push("s", mk::state_ty());
  ctx.push("t", mk::fin_trace(mk::var(0), mk::var(0)));
  ctx.push("n", mk::nat_ty());
  // t's type mentions s, which is Var(2) from the end of the context.
  EXPECT_TRUE(alpha_eq(*ctx.lookup(1), mk::fin_trace(mk::var(2), mk::var(2))));
  EXPECT_FALSE(ctx.lookup(3).has_value());
}
