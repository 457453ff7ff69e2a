#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "freqdim/errors.hpp"
#include "freqdim/runner.hpp"

namespace {

constexpr const char* kKinds[] = {"slln-run",      "freq-count",      "pair-count",
                                  "dim-formula",   "dim-estimate",    "mixing-report",
                                  "mixingale-decay", "construct-point", "cf-bound"};

constexpr const char* kKindHelp[] = {
    "scheduled running averages against the product-measure mean",
    "occupation counts of scheduled digit tuples",
    "counts of scheduled tuples paired with their right shift",
    "closed-form digit-frequency dimension",
    "cylinder mass scaling along a sampled point",
    "dependence coefficient table and standing-assumption diagnostics",
    "conditional-expectation or centering decay along a schedule",
    "sample a point with prescribed digit frequencies",
    "entropy-over-growth lower bound for continued-fraction sets"};

struct SubState {
  CLI::App* cmd = nullptr;
  std::string config;
  std::string out;
  std::string seeds;
  int threads = 1;
};

std::optional<std::pair<std::uint64_t, std::uint64_t>> parse_seed_range(
    const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const std::uint64_t a = std::stoull(s);
      return std::make_pair(a, a);
    }
    const std::uint64_t a = std::stoull(s.substr(0, dots));
    const std::uint64_t b = std::stoull(s.substr(dots + 2));
    return std::make_pair(a, b);
  } catch (const std::exception&) {
    throw freqdim::ConfigError("cannot parse seed range \"" + s + "\"; expected a..b");
  }
}

int run_subcommand(const char* kind, const SubState& st) {
  freqdim::runner::Overrides o;
  o.experiment = kind;
  if (!st.out.empty()) o.outdir = st.out;
  o.seed_range = parse_seed_range(st.seeds);
  const auto cfg = freqdim::runner::RunConfig::load(st.config, o);
  const auto res = freqdim::runner::execute(cfg, st.threads);
  const auto dir = freqdim::runner::write_artifacts(res);
  std::printf("wrote %s (%zu seeds)\n", dir.c_str(), res.per_seed.size());
  std::printf("mean |deviation| %.17g, max |deviation| %.17g\n", res.mean_abs_deviation,
              res.max_abs_deviation);
  return 0;
}

int run_replay(const std::string& path, int threads) {
  const auto rr = freqdim::runner::replay(path, threads);
  if (!rr.version_warning.empty())
    std::fprintf(stderr, "warning: %s\n", rr.version_warning.c_str());
  if (rr.ok) {
    std::printf("replay match\n");
    return 0;
  }
  for (const auto& mm : rr.mismatches) {
    if (mm.row == 0) {
      std::fprintf(stderr, "seed %llu: CSV file missing\n",
                   static_cast<unsigned long long>(mm.seed));
    } else {
      std::fprintf(stderr, "seed %llu: first differing row %zu\n  expected: %s\n  actual:   %s\n",
                   static_cast<unsigned long long>(mm.seed), mm.row, mm.expected.c_str(),
                   mm.actual.c_str());
    }
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch runner for digit-frequency limit experiments"};
  app.set_version_flag("--version", freqdim::runner::tool_version());
  app.require_subcommand(0, 1);

  std::string replay_path;
  int replay_threads = 1;
  app.add_option("--replay", replay_path,
                 "re-run the stamped config of a report.json and byte-compare its CSVs");
  app.add_option("--threads", replay_threads, "worker threads for --replay");

  std::vector<SubState> subs(std::size(kKinds));
  for (std::size_t i = 0; i < std::size(kKinds); ++i) {
    auto& st = subs[i];
    st.cmd = app.add_subcommand(kKinds[i], kKindHelp[i]);
    st.cmd->add_option("--config", st.config, "experiment config file")->required();
    st.cmd->add_option("--out", st.out, "output root (default from config, else ./runs)");
    st.cmd->add_option("--seeds", st.seeds, "seed range a..b, replacing the config seeds");
    st.cmd->add_option("--threads", st.threads, "worker threads across seeds");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    app.exit(e);
    return 1;
  }

  try {
    for (std::size_t i = 0; i < std::size(kKinds); ++i)
      if (subs[i].cmd->parsed()) return run_subcommand(kKinds[i], subs[i]);
    if (!replay_path.empty()) return run_replay(replay_path, replay_threads);
    std::fprintf(stderr, "nothing to do: pick a subcommand or --replay (see --help)\n");
    return 1;
  } catch (const freqdim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const freqdim::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const freqdim::ResourceCapError& e) {
    std::fprintf(stderr, "resource cap: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
