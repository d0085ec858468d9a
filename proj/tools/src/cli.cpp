#include <chrono>
#include <cstdlib>
#include <fstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "dekl/cli.hpp"
#include "dekl/errors.hpp"
#include "dekl/metatheory.hpp"

#ifndef DEKL_CORPUS_DIR
#define DEKL_CORPUS_DIR "corpus"
#endif

namespace dekl::cli {

Json without_timing(Json report) {
  report.erase("timingMs");
  return report;
}

namespace {

bool color_enabled() {
  const char* env = std::getenv("DEKL_COLOR");
  if (env && std::string(env) == "0") return false;
  if (env && std::string(env) == "1") return true;
  return isatty(STDOUT_FILENO) != 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dekl: kernel and semantic analyzer for trace-indexed knowledge"};
  app.require_subcommand(1);
  std::string json_path;
  app.add_option("--json", json_path, "Write the machine-readable report to PATH");

  std::vector<std::string> files;
  auto* check = app.add_subcommand("check", "Type-check .dekl files");
  check->add_option("files", files, "Input files")->required();

  std::string file;
  std::string presheaf;
  std::size_t depth = 0;
  auto* analyze = app.add_subcommand("analyze", "Build presheaves and decide non-monotonicity");
  analyze->add_option("file", file, "Input file")->required();
  auto* presheaf_opt = analyze->add_option("--presheaf", presheaf, "Only this presheaf");
  auto* depth_opt = analyze->add_option("--depth", depth, "Base depth bound (overrides declarations)")
                        ->check(CLI::PositiveNumber);

  std::size_t max_len = 5;
  auto* adequacy = app.add_subcommand("adequacy", "Round-trip interp/reify over enumerated traces");
  adequacy->add_option("file", file, "Input file")->required();
  adequacy->add_option("--max-len", max_len, "Trace length bound")->capture_default_str();

  std::uint64_t seed = 1;
  std::size_t iters = 1000;
  std::size_t max_size = 8;
  auto* meta = app.add_subcommand("meta", "Structural metatheory suites and bounded consistency");
  meta->add_option("--seed", seed, "Generator seed")->capture_default_str()->check(CLI::PositiveNumber);
  meta->add_option("--iters", iters, "Iterations per property")->capture_default_str()->check(CLI::PositiveNumber);
  meta->add_option("--max-size", max_size, "Consistency search size bound")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, kMaxSearchSize));

  std::string dir = DEKL_CORPUS_DIR;
  bool bless = false;
  auto* corpus = app.add_subcommand("corpus", "Run the bundled corpus against its expected reports");
  corpus->add_option("--dir", dir, "Corpus directory")->capture_default_str();
  corpus->add_flag("--bless", bless, "Rewrite the expected reports");

  for (auto* sub : {check, analyze, adequacy, meta, corpus}) {
    sub->add_option("--json", json_path, "Write the machine-readable report to PATH");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "dekl: " << e.what() << "\n";
    return kInputError;
  }

  Style style{color_enabled()};
  auto start = std::chrono::steady_clock::now();
  Outcome o;
  std::string command;
  try {
    if (check->parsed()) {
      command = "check";
      o = check_files(files, style);
    } else if (analyze->parsed()) {
      command = "analyze";
      std::optional<std::string> p;
      if (*presheaf_opt) p = presheaf;
      std::optional<std::size_t> d;
      if (*depth_opt) d = depth;
      o = analyze_file(file, p, d, style);
    } else if (adequacy->parsed()) {
      command = "adequacy";
      o = adequacy_file(file, max_len, style);
    } else if (meta->parsed()) {
      command = "meta";
      o = run_meta(seed, iters, max_size, style);
    } else {
      command = "corpus";
      o = run_corpus(dir, bless, style);
    }
  } catch (const std::exception& e) {
    err << "dekl: internal error: " << e.what() << "\n";
    return kInternal;
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

  out << o.text;
  if (!json_path.empty()) {
    Json report;
    report["schemaVersion"] = kSchemaVersion;
    report["command"] = command;
    report["args"] = args;
    report["exitCode"] = o.exit_code;
    for (auto& [key, value] : o.report.items()) report[key] = value;
    report["timingMs"] = elapsed.count();
    std::ofstream f(json_path);
    if (!f) {
      err << "dekl: " << json_path << ": cannot write report\n";
      return std::max(o.exit_code, static_cast<int>(kInputError));
    }
    f << report.dump(2) << "\n";
  }
  return o.exit_code;
}

}  // namespace dekl::cli
