#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "dekl/cli.hpp"
#include "dekl/errors.hpp"
#include "dekl/kernel.hpp"
#include "dekl/metatheory.hpp"
#include "dekl/parser.hpp"
#include "dekl/presheaf.hpp"
#include "dekl/printer.hpp"
#include "dekl/transition.hpp"

namespace dekl::cli {

namespace fs = std::filesystem;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json span_json(const SourceSpan& s) {
  return Json{{"file", s.file},
              {"startLine", s.start_line},
              {"startCol", s.start_col},
              {"endLine", s.end_line},
              {"endCol", s.end_col}};
}

/// A failure while loading or checking one file, with its exit status.
struct Diagnostic {
  int exit_code = kOk;
  std::string status = "ok";
  std::string text;
  Json json;
};

Diagnostic diagnose(const std::string& path) {
  try {
    throw;
  } catch (const IoError& e) {
    return {kInputError, "io-error", e.what(), Json{{"kind", "IoError"}, {"message", e.what()}}};
  } catch (const ParseError& e) {
    Json j{{"kind", "ParseError"}, {"message", e.what()}, {"span", span_json(e.span())}};
    j["expected"] = e.expected();
    j["found"] = e.found();
    return {kInputError, "parse-error", e.format(), j};
  } catch (const TypeError& e) {
    Json j{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}, {"span", span_json(e.span())}};
    if (e.kind() == TypeErrorKind::EndpointMismatch) {
      j["expected"] = e.expected_state;
      j["actual"] = e.actual_state;
    } else if (e.expected || e.actual) {
      j["expected"] = e.expected ? pretty_print(e.expected) : "";
      j["actual"] = e.actual ? pretty_print(e.actual) : "";
    }
    std::string where = e.span().file.empty() ? path : e.span().to_string();
    return {kFailure, "type-error", where + ": " + std::string(to_string(e.kind())) + ": " + e.what(), j};
  } catch (const SemanticError& e) {
    return {kFailure, "semantic-error", path + ": " + e.what(), Json{{"kind", "SemanticError"}, {"message", e.what()}}};
  } catch (const InternalError& e) {
    return {kInternal, "internal-error", path + ": internal error: " + e.what(),
            Json{{"kind", "InternalError"}, {"message", e.what()}}};
  } catch (const std::exception& e) {
    return {kInternal, "internal-error", path + ": internal error: " + e.what(),
            Json{{"kind", "InternalError"}, {"message", e.what()}}};
  }
}

CheckedModule load_checked(const std::string& path) { return check_module(parse_module(read_file(path), path)); }

/// Runs `f` on every element concurrently and returns results in input order.
template <class T, class F>
auto parallel_map(const std::vector<T>& xs, F f) {
  using R = decltype(f(xs.front()));
  std::vector<std::future<R>> futures;
  for (const auto& x : xs) futures.push_back(std::async(std::launch::async, f, std::cref(x)));
  std::vector<R> out;
  for (auto& fu : futures) out.push_back(fu.get());
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

const char* spec_kind(const PresheafSpec& spec) {
  switch (spec.index()) {
    case 0: return "predicate";
    case 1: return "tabulated";
    default: return "evidence";
  }
}

std::string edge_label(const TransitionSystem& ts, const Path& whole) {
  const StepEdge& e = ts.step(whole.edges.back());
  return e.event + "/" + e.witness;
}

struct PresheafResult {
  int exit_code = kOk;
  Json item;
  std::vector<std::string> lines;
};

PresheafResult analyze_one(const CheckedModule& cm, const PresheafDecl& d, std::optional<std::size_t> depth,
                           const Style& style) {
  PresheafResult r;
  const std::string& name = presheaf_name(d.spec);
  std::size_t bound = depth.value_or(d.depth);
  r.item["presheaf"] = name;
  r.item["kind"] = spec_kind(d.spec);
  r.item["roots"] = d.roots;
  r.item["depth"] = bound;

  FinitePresheaf p;
  try {
    p = build_presheaf(d.spec, cm.system, d.roots, bound);
  } catch (const SemanticError& e) {
    r.exit_code = kFailure;
    r.item["status"] = "rejected";
    r.item["message"] = e.what();
    r.lines.push_back(name + ": " + style.bad("rejected") + ": " + e.what());
    return r;
  }
  if (auto bad = validate_presheaf(p)) {
    r.exit_code = kFailure;
    r.item["status"] = "invalid";
    r.item["message"] = *bad;
    r.lines.push_back(name + ": " + style.bad("invalid") + ": " + *bad);
    return r;
  }
  NonMonotonicityReport rep = analyze_nonmonotonicity(p);
  const TransitionSystem& ts = *cm.system;
  r.item["status"] = "ok";
  r.item["baseSize"] = p.base.size();
  r.item["verdict"] = std::string(to_string(rep.verdict));
  r.item["prefixStable"] = rep.prefix_stable;
  Json ws = Json::array();
  for (const auto& w : rep.witnesses) {
    ws.push_back(Json{{"prefix", format_path(ts, w.extension.prefix)},
                      {"whole", format_path(ts, w.extension.whole)},
                      {"edge", edge_label(ts, w.extension.whole)},
                      {"orphan", w.orphan}});
  }
  r.item["witnesses"] = ws;

  std::string verdict = std::string(to_string(rep.verdict));
  r.lines.push_back(name + " (" + spec_kind(d.spec) + ", depth " + std::to_string(bound) + ", " +
                    std::to_string(p.base.size()) + " traces): " +
                    (rep.prefix_stable ? style.ok(verdict) : style.bad(verdict)) +
                    ", prefix-stable: " + (rep.prefix_stable ? "yes" : "no"));
  constexpr std::size_t kShown = 8;
  for (std::size_t i = 0; i < rep.witnesses.size() && i < kShown; ++i) {
    const auto& w = rep.witnesses[i];
    r.lines.push_back("  " + format_path(ts, w.extension.whole) + "  loses " + w.orphan + " at " +
                      edge_label(ts, w.extension.whole));
  }
  if (rep.witnesses.size() > kShown) {
    r.lines.push_back(style.dim("  ... " + std::to_string(rep.witnesses.size() - kShown) + " more"));
  }
  return r;
}

}  // namespace

// --- check -------------------------------------------------------------------

Outcome check_files(const std::vector<std::string>& files, const Style& style) {
  struct FileResult {
    Diagnostic diag;
    Json item;
  };
  auto results = parallel_map(files, [](const std::string& f) {
    FileResult r;
    r.item["file"] = f;
    try {
      CheckedModule cm = load_checked(f);
      std::size_t corecs = cm.module->corecs().size();
      r.item["status"] = "ok";
      r.item["declarations"] = cm.module->declarations.size();
      r.item["definitions"] = cm.defs.size();
      r.item["corecs"] = corecs;
    } catch (...) {
      r.diag = diagnose(f);
      r.item["status"] = r.diag.status;
      r.item["diagnostics"] = Json::array({r.diag.json});
    }
    return r;
  });

  Outcome out;
  std::vector<std::string> lines;
  Json items = Json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& r = results[i];
    out.exit_code = std::max(out.exit_code, r.diag.exit_code);
    if (r.diag.exit_code == kOk) {
      lines.push_back(files[i] + ": " + style.ok("OK") + " (" + std::to_string(r.item["definitions"].get<std::size_t>()) +
                      " definitions)");
    } else {
      lines.push_back(style.bad(r.diag.text));
    }
    items.push_back(r.item);
  }
  out.text = join_lines(lines);
  out.report["items"] = items;
  return out;
}

// --- analyze -----------------------------------------------------------------

Json analysis_items(const std::string& file, const std::optional<std::string>& presheaf,
                    std::optional<std::size_t> depth) {
  Outcome o = analyze_file(file, presheaf, depth, Style{});
  return o.report.value("items", Json::array());
}

Outcome analyze_file(const std::string& file, const std::optional<std::string>& presheaf,
                     std::optional<std::size_t> depth, const Style& style) {
  Outcome out;
  out.report["file"] = file;
  CheckedModule cm;
  try {
    cm = load_checked(file);
  } catch (...) {
    Diagnostic d = diagnose(file);
    out.exit_code = d.exit_code;
    out.text = style.bad(d.text) + "\n";
    out.report["status"] = d.status;
    out.report["diagnostics"] = Json::array({d.json});
    return out;
  }
  if (depth && *depth == 0) {
    out.exit_code = kFailure;
    out.text = style.bad(file + ": --depth must be at least 1") + "\n";
    out.report["status"] = "semantic-error";
    return out;
  }

  std::vector<const PresheafDecl*> decls;
  for (const auto* d : cm.module->presheaves()) {
    if (!presheaf || presheaf_name(d->spec) == *presheaf) decls.push_back(d);
  }
  if (presheaf && decls.empty()) {
    out.exit_code = kFailure;
    out.text = style.bad(file + ": no presheaf named '" + *presheaf + "'") + "\n";
    out.report["status"] = "semantic-error";
    return out;
  }

  auto results = parallel_map(decls, [&](const PresheafDecl* d) { return analyze_one(cm, *d, depth, style); });
  std::vector<std::string> lines;
  Json items = Json::array();
  for (auto& r : results) {
    out.exit_code = std::max(out.exit_code, r.exit_code);
    lines.insert(lines.end(), r.lines.begin(), r.lines.end());
    items.push_back(std::move(r.item));
  }
  if (decls.empty()) lines.push_back(file + ": no presheaves declared");
  out.report["status"] = out.exit_code == kOk ? "ok" : "failed";
  out.report["items"] = items;
  out.text = join_lines(lines);
  return out;
}

// --- adequacy ----------------------------------------------------------------

Outcome adequacy_file(const std::string& file, std::size_t max_len, const Style& style) {
  Outcome out;
  out.report["file"] = file;
  out.report["maxLen"] = max_len;
  CheckedModule cm;
  try {
    cm = load_checked(file);
  } catch (...) {
    Diagnostic d = diagnose(file);
    out.exit_code = d.exit_code;
    out.text = style.bad(d.text) + "\n";
    out.report["status"] = d.status;
    out.report["diagnostics"] = Json::array({d.json});
    return out;
  }
  const TransitionSystem& ts = *cm.system;
  Kernel k(cm.signature);

  std::vector<Path> paths = enumerate_traces(ts, ts.states(), max_len);
  Json failures = Json::array();
  for (const auto& p : paths) {
    TermPtr t = reify(ts, p);
    TermPtr ty = mk::fin_trace(mk::state(p.src), mk::state(p.dst));
    std::string problem;
    if (!k.accepts(Context{}, t, ty)) {
      problem = "reified term does not check at " + pretty_print(ty);
    } else if (interp(ts, k.nf(t)) != p) {
      problem = "interp(reify(p)) differs from p";
    } else if (!alpha_eq(reify(ts, interp(ts, t)), t)) {
      problem = "reify(interp(t)) differs from t";
    }
    if (!problem.empty()) failures.push_back(Json{{"path", format_path(ts, p)}, {"problem", problem}});
  }

  std::size_t pairs = 0;
  std::size_t agree = 0;
  for (const auto& a : ts.states()) {
    for (const auto& b : ts.states()) {
      ++pairs;
      bool oracle = reachable(ts, a, b);
      auto w = witness_path(ts, a, b);
      bool witnessed = w && k.accepts(Context{}, reify(ts, *w), mk::fin_trace(mk::state(a), mk::state(b)));
      if (oracle == witnessed) {
        ++agree;
      } else {
        failures.push_back(Json{{"path", a + " ~> " + b}, {"problem", "reachability and witness disagree"}});
      }
    }
  }

  out.report["paths"] = paths.size();
  out.report["statePairs"] = pairs;
  out.report["pairsAgreeing"] = agree;
  out.report["failures"] = failures;
  if (failures.empty()) {
    out.report["status"] = "ok";
    out.text = file + ": " + style.ok("round-trip OK") + ", " + std::to_string(paths.size()) + " paths, " +
               std::to_string(pairs) + " state pairs agree\n";
  } else {
    out.exit_code = kFailure;
    out.report["status"] = "failed";
    std::vector<std::string> lines{file + ": " + style.bad("round-trip FAILED") + ", " +
                                   std::to_string(failures.size()) + " problems"};
    for (const auto& f : failures) lines.push_back("  " + f["path"].get<std::string>() + ": " + f["problem"].get<std::string>());
    out.text = join_lines(lines);
  }
  return out;
}

// --- meta --------------------------------------------------------------------

Outcome run_meta(std::uint64_t seed, std::size_t iterations, std::size_t max_size, const Style& style) {
  Outcome out;
  GenConfig cfg;
  cfg.seed = seed;
  cfg.iterations = iterations;
  cfg.validate();
  out.report["seed"] = seed;
  out.report["iterations"] = iterations;

  Kernel k(credential_signature());
  std::vector<PropertyReport> reports = run_structural_suite(k, cfg);

  std::ostringstream text;
  char row[128];
  std::snprintf(row, sizeof row, "%-20s %10s %9s\n", "property", "iterations", "failures");
  text << row;
  Json suites = Json::array();
  for (const auto& r : reports) {
    std::snprintf(row, sizeof row, "%-20s %10zu %9zu", r.name.c_str(), r.iterations, r.failures.size());
    text << (r.ok() ? std::string(row) : style.bad(row)) << "\n";
    Json fails = Json::array();
    for (const auto& f : r.failures) {
      fails.push_back(Json{{"offset", f.offset}, {"counterexample", f.text}});
      text << "  #" << f.offset << ": " << f.text << "\n";
    }
    suites.push_back(Json{{"property", r.name}, {"iterations", r.iterations}, {"failures", fails}});
    if (!r.ok()) out.exit_code = kFailure;
  }
  out.report["suites"] = suites;

  auto bottom = consistency_search(k, max_size, mk::bottom());
  auto control = consistency_search(k, max_size, mk::nat_ty());
  out.report["consistency"] = Json{{"maxSize", max_size},
                                   {"target", "bot"},
                                   {"inhabitant", bottom ? Json(pretty_print(*bottom)) : Json(nullptr)},
                                   {"control", "Nat"},
                                   {"controlInhabitant", control ? Json(pretty_print(*control)) : Json(nullptr)}};
  if (bottom) {
    out.exit_code = kFailure;
    text << style.bad("consistency: closed inhabitant of bot found: " + pretty_print(*bottom)) << "\n";
  } else {
    text << "consistency (size <= " << max_size << "): " << style.ok("no closed inhabitant of bot") << "\n";
  }
  if (control) {
    text << "control: Nat is inhabited by " << pretty_print(*control) << "\n";
  } else {
    out.exit_code = kFailure;
    text << style.bad("control: no inhabitant of Nat found") << "\n";
  }
  out.report["status"] = out.exit_code == kOk ? "ok" : "failed";
  out.text = text.str();
  return out;
}

// --- corpus ------------------------------------------------------------------

Outcome run_corpus(const std::string& dir, bool bless, const Style& style) {
  Outcome out;
  std::vector<std::string> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".dekl") files.push_back(entry.path().string());
  }
  if (ec) {
    out.exit_code = kInputError;
    out.text = style.bad(dir + ": cannot read corpus directory") + "\n";
    out.report["status"] = "io-error";
    return out;
  }
  std::sort(files.begin(), files.end());

  struct Result {
    int exit_code = kOk;
    Json item;
    std::vector<std::string> lines;
  };
  auto results = parallel_map(files, [&](const std::string& f) {
    Result r;
    std::string stem = fs::path(f).stem().string();
    r.item["file"] = stem;
    Outcome analysis = analyze_file(f, std::nullopt, std::nullopt, Style{});
    Json actual = Json{{"file", stem}, {"presheaves", analysis.report.value("items", Json::array())}};
    if (analysis.exit_code != kOk) {
      r.exit_code = analysis.exit_code;
      r.item["status"] = "failed";
      r.lines.push_back(stem + ": " + style.bad("FAILED") + "\n" + analysis.text);
      return r;
    }

    Json corecs = Json::array();
    try {
      ModuleAST m = parse_module(read_file(f), f);
      for (const auto* c : m.corecs()) {
        Observation o = observe_inftrace(m, c->name, 50);
        corecs.push_back(Json{{"name", c->name}, {"depth", 50}, {"final", o.final_state}});
      }
    } catch (...) {
      Diagnostic d = diagnose(f);
      r.exit_code = d.exit_code;
      r.item["status"] = d.status;
      r.lines.push_back(style.bad(d.text));
      return r;
    }
    actual["corecs"] = corecs;

    fs::path expected_path = fs::path(dir) / "expected" / (stem + ".json");
    if (bless) {
      fs::create_directories(expected_path.parent_path());
      std::ofstream(expected_path) << actual.dump(2) << "\n";
      r.item["status"] = "blessed";
      r.lines.push_back(stem + ": expectations written");
      return r;
    }
    Json expected;
    try {
      expected = Json::parse(read_file(expected_path.string()));
    } catch (const std::exception& e) {
      r.exit_code = kInputError;
      r.item["status"] = "io-error";
      r.lines.push_back(style.bad(stem + ": no readable expectations at " + expected_path.string()));
      return r;
    }
    bool match = expected == actual;
    r.item["status"] = match ? "ok" : "mismatch";
    r.item["presheaves"] = Json::array();
    for (const auto& p : actual["presheaves"]) {
      r.item["presheaves"].push_back(Json{{"presheaf", p["presheaf"]},
                                          {"verdict", p.value("verdict", p.value("status", ""))},
                                          {"prefixStable", p.value("prefixStable", false)}});
    }
    r.item["corecs"] = corecs.size();
    std::string summary;
    for (const auto& p : r.item["presheaves"]) {
      if (!summary.empty()) summary += ", ";
      summary += p["presheaf"].get<std::string>() + " " + p["verdict"].get<std::string>();
    }
    if (match) {
      r.lines.push_back(stem + ": " + style.ok("OK") + " (" + summary + ")");
    } else {
      r.exit_code = kFailure;
      r.lines.push_back(stem + ": " + style.bad("MISMATCH") + " against " + expected_path.string());
      Json diff = Json::diff(expected, actual);
      r.item["diff"] = diff;
      r.lines.push_back("  " + diff.dump());
    }
    return r;
  });

  std::vector<std::string> lines;
  Json items = Json::array();
  for (auto& r : results) {
    out.exit_code = std::max(out.exit_code, r.exit_code);
    lines.insert(lines.end(), r.lines.begin(), r.lines.end());
    items.push_back(std::move(r.item));
  }
  if (files.empty()) {
    out.exit_code = kInputError;
    lines.push_back(style.bad(dir + ": no .dekl files"));
  }
  out.report["status"] = out.exit_code == kOk ? "ok" : "failed";
  out.report["items"] = items;
  out.text = join_lines(lines);
  return out;
}

}  // namespace dekl::cli
