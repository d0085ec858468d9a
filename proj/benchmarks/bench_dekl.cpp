#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "dekl/kernel.hpp"
#include "dekl/metatheory.hpp"
#include "dekl/parser.hpp"
#include "dekl/presheaf.hpp"
#include "dekl/transition.hpp"

using namespace dekl;

static std::string corpus_text(const char* name) {
  std::ifstream in(std::string(DEKL_CORPUS_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static void BM_ParseCredential(benchmark::State& state) {
  std::string text = corpus_text("credential.dekl");
  for (auto _ : state) benchmark::DoNotOptimize(parse_module(text, "credential.dekl"));
}
BENCHMARK(BM_ParseCredential);

static void BM_CheckCredential(benchmark::State& state) {
  ModuleAST m = parse_module(corpus_text("credential.dekl"), "credential.dekl");
  for (auto _ : state) benchmark::DoNotOptimize(check_module(m));
}
BENCHMARK(BM_CheckCredential);

// Trace length by trace_elim over a trace of state.range(0) uses.
static void BM_NormalizeTraceLength(benchmark::State& state) {
  Kernel k(credential_signature());
  TermPtr trace = mk::step(mk::nil(mk::state("S0")), mk::event("Issue"), mk::witness("issue0"));
  for (int i = 0; i < state.range(0); ++i) trace = mk::step(trace, mk::event("Use"), mk::witness("use1"));
  TermPtr motive = mk::lam(mk::lam(mk::nat_ty()));
  TermPtr step_case = mk::succ(mk::var(0));
  for (int i = 0; i < 6; ++i) step_case = mk::lam(step_case);
  TermPtr t = mk::trace_elim(motive, mk::zero(), step_case, trace);
  for (auto _ : state) benchmark::DoNotOptimize(k.nf(t));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NormalizeTraceLength)->RangeMultiplier(4)->Range(4, 256)->Complexity();

static void BM_EnumerateTraces(benchmark::State& state) {
  ModuleAST m = parse_module(corpus_text("defaults.dekl"), "defaults.dekl");
  TransitionSystem ts = m.system();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_traces(ts, ts.states(), state.range(0)));
}
BENCHMARK(BM_EnumerateTraces)->DenseRange(2, 8, 2);

static void BM_AnalyzeEvidence(benchmark::State& state) {
  ModuleAST m = parse_module(corpus_text("credential.dekl"), "credential.dekl");
  auto ts = std::make_shared<const TransitionSystem>(m.system());
  EvidenceSpec spec{"Auth", "Issue", "Revoke"};
  for (auto _ : state) {
    FinitePresheaf p = build_presheaf(spec, ts, {"S0"}, state.range(0));
    benchmark::DoNotOptimize(analyze_nonmonotonicity(p));
  }
}
BENCHMARK(BM_AnalyzeEvidence)->DenseRange(2, 8, 2);

static void BM_ConsistencySearch(benchmark::State& state) {
  Kernel k(credential_signature());
  for (auto _ : state) benchmark::DoNotOptimize(consistency_search(k, state.range(0), mk::bottom()));
}
BENCHMARK(BM_ConsistencySearch)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

static void BM_GenerateWellTyped(benchmark::State& state) {
  Kernel k(credential_signature());
  Generator gen(k, GenConfig{});
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen.generate(i++));
}
BENCHMARK(BM_GenerateWellTyped);

static void BM_SubjectReductionSuite(benchmark::State& state) {
  Kernel k(credential_signature());
  GenConfig cfg;
  cfg.iterations = 200;
  for (auto _ : state) benchmark::DoNotOptimize(run_subject_reduction(k, cfg));
}
BENCHMARK(BM_SubjectReductionSuite)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
