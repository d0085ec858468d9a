#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace dekl::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,     // a check or analysis failed
  kInputError = 2,  // unreadable or unparsable input
  kInternal = 3,    // the implementation broke one of its own invariants
};

inline constexpr int kSchemaVersion = 1;

struct Style {
  bool color = false;

  std::string ok(const std::string& s) const { return paint("32", s); }
  std::string bad(const std::string& s) const { return paint("31", s); }
  std::string dim(const std::string& s) const { return paint("2", s); }

 private:
  std::string paint(const char* code, const std::string& s) const {
    return color ? "\033[" + std::string(code) + "m" + s + "\033[0m" : s;
  }
};

/// What a command produced: an exit status, the human text and the
/// machine report body (without the envelope fields).
struct Outcome {
  int exit_code = kOk;
  std::string text;
  Json report = Json::object();
};

Outcome check_files(const std::vector<std::string>& files, const Style& style);
Outcome analyze_file(const std::string& file, const std::optional<std::string>& presheaf,
                     std::optional<std::size_t> depth, const Style& style);
Outcome adequacy_file(const std::string& file, std::size_t max_len, const Style& style);
Outcome run_meta(std::uint64_t seed, std::size_t iterations, std::size_t max_size, const Style& style);
/// Runs every top-level .dekl file of `dir` and compares its analysis with
/// dir/expected/<stem>.json. With `bless` the expectations are rewritten.
Outcome run_corpus(const std::string& dir, bool bless, const Style& style);

/// The presheaf part of an analysis, as stored in the corpus expectations.
Json analysis_items(const std::string& file, const std::optional<std::string>& presheaf,
                    std::optional<std::size_t> depth);

/// Full command line entry point. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The envelope minus its timing field, for determinism comparisons.
Json without_timing(Json report);

}  // namespace dekl::cli
