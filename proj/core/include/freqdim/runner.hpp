#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace freqdim::runner {

const char* tool_version();

// Command-line overrides are applied before canonicalization so the stamped
// config describes what actually ran.
struct Overrides {
  std::optional<std::string> outdir;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> seed_range;  // inclusive
  std::optional<std::string> experiment;  // subcommand cross-check
};

// A validated experiment description. `canonical` is the fully explicit
// config document: defaults materialized, rationals normalized, keys sorted.
// It round-trips through from_text byte-identically, and `hash` digests it.
// The output directory is placement rather than content, so it stays outside
// the hash and the same run lands in the same subdirectory under any root.
struct RunConfig {
  std::string experiment;
  std::string canonical;
  std::string hash;  // 16 hex digits
  std::vector<std::uint64_t> seeds;
  std::string outdir;

  static RunConfig load(const std::string& path, const Overrides& o = {});
  static RunConfig from_text(const std::string& text, const Overrides& o = {});
};

struct SeedArtifact {
  std::uint64_t seed = 0;
  std::string csv;      // full file contents, header row included
  double value = 0;     // headline scalar (final average, endpoint estimate, ...)
  double deviation = 0; // |value - target| where the experiment has one, else 0
};

struct RunResult {
  RunConfig config;
  std::vector<SeedArtifact> per_seed;  // sorted by seed
  std::string report_json;
  double mean_abs_deviation = 0;
  double max_abs_deviation = 0;
};

// Pure compute. Per-seed artifacts are byte-identical for any worker count.
RunResult execute(const RunConfig&, int threads = 1);

// Writes <outdir>/<hash>/<seed>.csv plus report.json; returns the directory.
std::string write_artifacts(const RunResult&);

struct ReplayMismatch {
  std::uint64_t seed = 0;
  std::size_t row = 0;  // 1-based first differing line; 0 means the file is missing
  std::string expected, actual;
};

struct ReplayResult {
  bool ok = false;
  std::string version_warning;  // set when the stamped tool version differs
  std::vector<ReplayMismatch> mismatches;
};

// Re-executes the stamped config and byte-compares the CSVs next to the report.
ReplayResult replay(const std::string& report_path, int threads = 1);

}  // namespace freqdim::runner
