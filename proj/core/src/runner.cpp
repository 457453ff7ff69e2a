#include "freqdim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "freqdim/digits.hpp"
#include "freqdim/errors.hpp"
#include "freqdim/fractal.hpp"
#include "freqdim/measures.hpp"
#include "freqdim/mixing.hpp"
#include "freqdim/nonconv.hpp"
#include "freqdim/observables.hpp"
#include "freqdim/rational.hpp"
#include "freqdim/rng.hpp"
#include "freqdim/schedules.hpp"

namespace freqdim::runner {
namespace {

using json = nlohmann::json;  // std::map keys, so dumps are sorted and stable
namespace fs = std::filesystem;

constexpr const char* kVersion =
#ifdef FREQDIM_VERSION
    FREQDIM_VERSION;
#else
    "0.0.0";
#endif

std::string fnv1a64_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// config access with precise complaints

const json& need(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + " is missing \"" + key + "\"");
  return *it;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) throw ConfigError(ctx + " has unknown key \"" + it.key() + "\"");
  }
}

Rational rat_of(const json& v, const std::string& ctx) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(BigInt(v.get<long long>()));
  if (v.is_number_float())
    throw ConfigError(ctx + ": write the value as a string (\"0.1\", \"1/3\") so it stays exact");
  throw ConfigError(ctx + " must be a rational written as a string or an integer");
}

std::string rat_str(const Rational& r) { return format_rational(r); }

std::int64_t int_of(const json& v, const std::string& ctx) {
  if (!v.is_number_integer()) throw ConfigError(ctx + " must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t uint_of(const json& v, const std::string& ctx) {
  const std::int64_t x = int_of(v, ctx);
  if (x < 0) throw ConfigError(ctx + " must be nonnegative");
  return static_cast<std::uint64_t>(x);
}

std::vector<Rational> rat_vec(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) throw ConfigError(ctx + " must be a nonempty array");
  std::vector<Rational> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(rat_of(e, ctx));
  return out;
}

std::vector<std::vector<Rational>> rat_mat(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) throw ConfigError(ctx + " must be a nonempty array of rows");
  std::vector<std::vector<Rational>> out;
  out.reserve(v.size());
  for (const auto& row : v) out.push_back(rat_vec(row, ctx + " row"));
  for (const auto& row : out)
    if (row.size() != out.size()) throw ConfigError(ctx + " must be square");
  return out;
}

json rat_vec_canon(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(rat_str(x));
  return a;
}

json rat_mat_canon(const std::vector<std::vector<Rational>>& m) {
  json a = json::array();
  for (const auto& row : m) a.push_back(rat_vec_canon(row));
  return a;
}

// ---- canonical sub-documents ----

json canon_model(const json& m) {
  const std::string type = need(m, "type", "model").get<std::string>();
  json out;
  out["type"] = type;
  if (type == "bernoulli") {
    check_keys(m, {"type", "weights", "first"}, "model");
    out["weights"] = rat_vec_canon(rat_vec(need(m, "weights", "model"), "model.weights"));
    out["first"] = m.contains("first") ? int_of(m["first"], "model.first") : 0;
  } else if (type == "markov-joint") {
    check_keys(m, {"type", "R"}, "model");
    out["R"] = rat_mat_canon(rat_mat(need(m, "R", "model"), "model.R"));
  } else if (type == "chain") {
    check_keys(m, {"type", "P", "obs"}, "model");
    const auto P = rat_mat(need(m, "P", "model"), "model.P");
    out["P"] = rat_mat_canon(P);
    json obs = json::array();
    if (m.contains("obs")) {
      if (!m["obs"].is_array() || m["obs"].size() != P.size())
        throw ConfigError("model.obs must list one digit per state");
      for (const auto& e : m["obs"]) obs.push_back(int_of(e, "model.obs"));
    } else {
      for (std::size_t i = 0; i < P.size(); ++i) obs.push_back(static_cast<std::int64_t>(i));
    }
    out["obs"] = obs;
  } else if (type == "gauss") {
    check_keys(m, {"type"}, "model");
  } else if (type == "cf-weights") {
    check_keys(m, {"type", "prefix", "gauss"}, "model");
    const bool gauss = m.contains("gauss") && m["gauss"].is_boolean() && m["gauss"].get<bool>();
    if (gauss == m.contains("prefix"))
      throw ConfigError("model cf-weights needs exactly one of \"prefix\" or \"gauss\": true");
    if (gauss)
      out["gauss"] = true;
    else
      out["prefix"] = rat_vec_canon(rat_vec(m["prefix"], "model.prefix"));
  } else {
    throw ConfigError("unknown model type \"" + type + "\"");
  }
  return out;
}

json canon_schedule(const json& s) {
  check_keys(s, {"q", "epsilon"}, "schedule");
  const json& q = need(s, "q", "schedule");
  if (!q.is_array() || q.empty())
    throw ConfigError("schedule.q must be a nonempty array of index functions");
  json out;
  json qs = json::array();
  for (const auto& e : q) {
    if (e.is_array()) {
      if (e.empty()) throw ConfigError("polynomial coefficient list is empty");
      json coeffs = json::array();
      for (const auto& c : e) coeffs.push_back(int_of(c, "schedule coefficient"));
      qs.push_back(coeffs);
    } else if (e.is_object()) {
      check_keys(e, {"base", "scale"}, "schedule entry");
      json ex;
      ex["base"] = int_of(need(e, "base", "schedule entry"), "schedule base");
      ex["scale"] = e.contains("scale")
                        ? rat_str(rat_of(e["scale"], "schedule scale"))
                        : std::string("1");
      qs.push_back(ex);
    } else {
      throw ConfigError("schedule entries are coefficient arrays or {base, scale} objects");
    }
  }
  out["q"] = qs;
  out["epsilon"] = s.contains("epsilon")
                       ? rat_str(rat_of(s["epsilon"], "schedule.epsilon"))
                       : std::string("1/2");
  return out;
}

json canon_observable(const json& o) {
  const std::string type = need(o, "type", "observable").get<std::string>();
  json out;
  out["type"] = type;
  if (type == "indicator") {
    check_keys(o, {"type", "word"}, "observable");
    const json& w = need(o, "word", "observable");
    if (!w.is_array() || w.empty()) throw ConfigError("observable.word must be a nonempty array");
    json word = json::array();
    for (const auto& d : w) word.push_back(int_of(d, "observable.word"));
    out["word"] = word;
  } else if (type == "table") {
    check_keys(o, {"type", "values"}, "observable");
    out["values"] = rat_vec_canon(rat_vec(need(o, "values", "observable"), "observable.values"));
  } else {
    throw ConfigError("unknown observable type \"" + type + "\"");
  }
  return out;
}

json canon_uint_list(const json& v, const std::string& ctx, bool sort_unique) {
  if (!v.is_array() || v.empty()) throw ConfigError(ctx + " must be a nonempty array");
  std::vector<std::uint64_t> xs;
  xs.reserve(v.size());
  for (const auto& e : v) xs.push_back(uint_of(e, ctx));
  if (sort_unique) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
  json out = json::array();
  for (auto x : xs) out.push_back(x);
  return out;
}

std::vector<std::uint64_t> uint_list(const json& v) {
  std::vector<std::uint64_t> out;
  for (const auto& e : v) out.push_back(e.get<std::uint64_t>());
  return out;
}

// ---- builders from canonical documents ----

measures::Law law_of(const json& m) {
  const std::string type = m.at("type").get<std::string>();
  if (type == "bernoulli")
    return measures::BernoulliLaw::from_weights(rat_vec(m.at("weights"), "weights"),
                                                m.at("first").get<std::int64_t>());
  if (type == "markov-joint")
    return measures::MarkovLaw::from_joint(rat_mat(m.at("R"), "R"));
  if (type == "chain") {
    std::vector<digits::Digit> obs;
    for (const auto& e : m.at("obs")) obs.push_back(e.get<std::int64_t>());
    return measures::FiniteMarkovChain::from_transition(rat_mat(m.at("P"), "P"), obs);
  }
  if (type == "gauss") return measures::GaussMarginalLaw{};
  throw ConfigError("model type \"" + type + "\" is not a stationary digit law");
}

measures::FiniteMarkovChain chain_of(const json& m) {
  if (m.at("type").get<std::string>() != "chain")
    throw ConfigError("this experiment needs a model of type \"chain\"");
  return std::get<measures::FiniteMarkovChain>(law_of(m));
}

measures::DigitWeightSeq cf_weights_of(const json& m) {
  if (m.at("type").get<std::string>() != "cf-weights")
    throw ConfigError("this experiment needs a model of type \"cf-weights\"");
  if (m.contains("gauss")) return measures::DigitWeightSeq::gauss();
  return measures::DigitWeightSeq::finite(rat_vec(m.at("prefix"), "prefix"));
}

schedules::Schedule schedule_of(const json& s) {
  schedules::Schedule out;
  for (const auto& e : s.at("q")) {
    if (e.is_array()) {
      std::vector<std::int64_t> coeffs;
      for (const auto& c : e) coeffs.push_back(c.get<std::int64_t>());
      out.q.push_back(schedules::ScheduleFn::poly(std::move(coeffs)));
    } else {
      out.q.push_back(schedules::ScheduleFn::exponential(
          e.at("base").get<std::int64_t>(), parse_rational(e.at("scale").get<std::string>())));
    }
  }
  out.epsilon = parse_rational(s.at("epsilon").get<std::string>());
  return out;
}

observables::Observable observable_of(const json& o, const digits::Alphabet& alpha,
                                      int arity) {
  const std::string type = o.at("type").get<std::string>();
  if (type == "indicator") {
    std::vector<digits::Digit> word;
    for (const auto& d : o.at("word")) word.push_back(d.get<std::int64_t>());
    if (static_cast<int>(word.size()) != arity)
      throw ValidationError("observable word length " + std::to_string(word.size()) +
                            " does not match schedule arity " + std::to_string(arity));
    return observables::Observable::indicator_product(alpha, std::move(word));
  }
  return observables::Observable::table(alpha, arity, rat_vec(o.at("values"), "values"));
}

std::string word_str(const std::vector<digits::Digit>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(w[i]);
  }
  return out;
}

// ---- per-kind canonicalization ----

json canonicalize(const json& in) {
  check_keys(in,
             {"experiment", "model", "schedule", "observable", "N", "checkpoints", "seeds",
              "out", "targets", "words", "component", "n", "mode", "m_grid", "n_grid",
              "n_max", "p", "q", "delta", "gzb"},
             "config");
  const std::string kind = need(in, "experiment", "config").get<std::string>();
  json out;
  out["experiment"] = kind;

  // seeds: sorted, deduplicated; deterministic experiments default to one seed
  {
    json seeds = json::array();
    if (in.contains("seeds"))
      seeds = canon_uint_list(in["seeds"], "seeds", true);
    else
      seeds.push_back(0);
    if (seeds.size() > 100000) throw ConfigError("more than 1e5 seeds");
    out["seeds"] = seeds;
  }

  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (in.contains(k))
        throw ConfigError("\"" + std::string(k) + "\" does not apply to experiment \"" + kind +
                          "\"");
  };

  if (kind == "slln-run") {
    forbid({"targets", "words", "component", "n", "mode", "m_grid", "n_grid", "n_max", "p",
            "q", "delta", "gzb"});
    out["model"] = canon_model(need(in, "model", "config"));
    out["schedule"] = canon_schedule(need(in, "schedule", "config"));
    out["observable"] = canon_observable(need(in, "observable", "config"));
    const std::uint64_t N = uint_of(need(in, "N", "config"), "N");
    if (N == 0) throw ConfigError("N must be positive");
    out["N"] = N;
    if (in.contains("checkpoints")) {
      out["checkpoints"] = canon_uint_list(in["checkpoints"], "checkpoints", true);
    } else {
      json cp = json::array();
      for (auto c : nonconv::dyadic_checkpoints(N)) cp.push_back(c);
      out["checkpoints"] = cp;
    }
  } else if (kind == "freq-count" || kind == "pair-count") {
    forbid({"observable", "checkpoints", "component", "n", "mode", "m_grid", "n_grid",
            "n_max", "p", "q", "delta", "gzb"});
    if (kind == "pair-count") forbid({"targets", "words"});
    out["model"] = canon_model(need(in, "model", "config"));
    out["schedule"] = canon_schedule(need(in, "schedule", "config"));
    const std::uint64_t N = uint_of(need(in, "N", "config"), "N");
    if (N == 0) throw ConfigError("N must be positive");
    out["N"] = N;
    if (kind == "freq-count") {
      if (in.contains("targets")) {
        const json& t = in["targets"];
        check_keys(t, {"r", "first"}, "targets");
        json ct;
        ct["r"] = rat_vec_canon(rat_vec(need(t, "r", "targets"), "targets.r"));
        ct["first"] = t.contains("first") ? int_of(t["first"], "targets.first") : 0;
        out["targets"] = ct;
      }
      if (in.contains("words")) {
        if (!in["words"].is_array() || in["words"].empty())
          throw ConfigError("words must be a nonempty array of digit arrays");
        json ws = json::array();
        for (const auto& w : in["words"]) {
          if (!w.is_array() || w.empty()) throw ConfigError("each word is a nonempty digit array");
          json cw = json::array();
          for (const auto& d : w) cw.push_back(int_of(d, "word digit"));
          ws.push_back(cw);
        }
        out["words"] = ws;
      }
    }
  } else if (kind == "dim-formula") {
    forbid({"schedule", "observable", "N", "checkpoints", "targets", "words", "component",
            "n", "mode", "m_grid", "n_grid", "n_max", "p", "q", "delta", "gzb"});
    json model = canon_model(need(in, "model", "config"));
    const std::string mt = model["type"].get<std::string>();
    if (mt != "bernoulli" && mt != "markov-joint")
      throw ConfigError("dim-formula takes a bernoulli or markov-joint model");
    out["model"] = model;
  } else if (kind == "dim-estimate") {
    forbid({"schedule", "observable", "targets", "words", "component", "n", "mode", "m_grid",
            "n_grid", "n_max", "p", "q", "delta", "gzb"});
    json model = canon_model(need(in, "model", "config"));
    const std::string mt = model["type"].get<std::string>();
    if (mt != "bernoulli" && mt != "markov-joint")
      throw ConfigError("dim-estimate takes a bernoulli or markov-joint model");
    out["model"] = model;
    const std::uint64_t N = uint_of(need(in, "N", "config"), "N");
    if (N == 0) throw ConfigError("N must be positive");
    out["N"] = N;
    if (in.contains("checkpoints")) {
      out["checkpoints"] = canon_uint_list(in["checkpoints"], "checkpoints", true);
    } else {
      json cp = json::array();
      std::vector<std::uint64_t> grid;
      for (int j = 9; j >= 0; --j) grid.push_back(std::max<std::uint64_t>(1, N >> j));
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      for (auto g : grid) cp.push_back(g);
      out["checkpoints"] = cp;
    }
  } else if (kind == "mixing-report") {
    forbid({"schedule", "observable", "N", "checkpoints", "targets", "words", "component",
            "n", "mode", "m_grid", "n_grid", "gzb"});
    json model = canon_model(need(in, "model", "config"));
    if (model["type"].get<std::string>() != "chain")
      throw ConfigError("mixing-report takes a model of type \"chain\"");
    out["model"] = model;
    const std::uint64_t n_max =
        in.contains("n_max") ? uint_of(in["n_max"], "n_max") : 16;
    if (n_max < 1 || n_max > 4096) throw ConfigError("n_max must lie in [1, 4096]");
    out["n_max"] = n_max;
    out["p"] = in.contains("p") ? rat_str(rat_of(in["p"], "p")) : std::string("2");
    out["q"] = in.contains("q") ? rat_str(rat_of(in["q"], "q")) : std::string("4");
    out["delta"] = in.contains("delta") ? rat_str(rat_of(in["delta"], "delta"))
                                        : std::string("1/10");
  } else if (kind == "mixingale-decay") {
    forbid({"N", "checkpoints", "targets", "words", "n_max", "p", "q", "delta", "gzb"});
    json model = canon_model(need(in, "model", "config"));
    if (model["type"].get<std::string>() != "chain")
      throw ConfigError("mixingale-decay takes a model of type \"chain\"");
    out["model"] = model;
    out["schedule"] = canon_schedule(need(in, "schedule", "config"));
    out["observable"] = canon_observable(need(in, "observable", "config"));
    const std::uint64_t comp = uint_of(need(in, "component", "config"), "component");
    if (comp < 1) throw ConfigError("component index is 1-based");
    out["component"] = comp;
    const std::string mode =
        in.contains("mode") ? in["mode"].get<std::string>() : std::string("conditional");
    if (mode != "conditional" && mode != "centering")
      throw ConfigError("mode must be \"conditional\" or \"centering\"");
    out["mode"] = mode;
    if (mode == "conditional") {
      forbid({"n_grid"});
      const std::uint64_t n = uint_of(need(in, "n", "config"), "n");
      if (n < 2) throw ConfigError("n must be at least 2");
      out["n"] = n;
      if (in.contains("m_grid")) {
        out["m_grid"] = canon_uint_list(in["m_grid"], "m_grid", true);
      } else {
        json mg = json::array();
        const std::uint64_t cap = std::min<std::uint64_t>(32, n);
        std::vector<std::uint64_t> grid;
        for (double x = 2; x <= static_cast<double>(cap); x *= 1.4)
          grid.push_back(static_cast<std::uint64_t>(x));
        grid.push_back(cap);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (auto g : grid) mg.push_back(g);
        out["m_grid"] = mg;
      }
    } else {
      forbid({"m_grid", "n"});
      if (in.contains("n_grid")) {
        out["n_grid"] = canon_uint_list(in["n_grid"], "n_grid", true);
      } else {
        json ng = json::array();
        for (std::uint64_t n = 4; n <= 64; n *= 2) ng.push_back(n);
        out["n_grid"] = ng;
      }
    }
  } else if (kind == "construct-point") {
    forbid({"checkpoints", "targets", "words", "component", "n", "m_grid", "n_grid", "n_max",
            "p", "q", "delta"});
    json model = canon_model(need(in, "model", "config"));
    const std::string mt = model["type"].get<std::string>();
    if (mt != "bernoulli" && mt != "cf-weights")
      throw ConfigError("construct-point takes a bernoulli or cf-weights model");
    out["model"] = model;
    const std::string mode =
        in.contains("mode") ? in["mode"].get<std::string>() : std::string("iid");
    if (mode != "iid" && mode != "truncated")
      throw ConfigError("mode must be \"iid\" or \"truncated\"");
    if (mt == "bernoulli" && mode != "iid")
      throw ConfigError("a bernoulli model only supports mode \"iid\"");
    out["mode"] = mode;
    const std::uint64_t N = uint_of(need(in, "N", "config"), "N");
    if (N == 0 || N > 1000000) throw ConfigError("N must lie in [1, 1e6]");
    out["N"] = N;
    if (in.contains("gzb")) {
      const json& g = in["gzb"];
      check_keys(g, {"b", "k_max"}, "gzb");
      json cg;
      cg["b"] = rat_str(rat_of(need(g, "b", "gzb"), "gzb.b"));
      cg["k_max"] = uint_of(need(g, "k_max", "gzb"), "gzb.k_max");
      out["gzb"] = cg;
      out["schedule"] = canon_schedule(need(in, "schedule", "config"));
    } else if (in.contains("schedule")) {
      throw ConfigError("construct-point only takes a schedule together with \"gzb\"");
    }
  } else if (kind == "cf-bound") {
    forbid({"schedule", "observable", "N", "checkpoints", "targets", "words", "component",
            "mode", "m_grid", "n_grid", "n_max", "p", "q", "delta", "gzb"});
    json model = canon_model(need(in, "model", "config"));
    if (model["type"].get<std::string>() != "cf-weights" || !model.contains("prefix"))
      throw ConfigError("cf-bound takes a cf-weights model with a finite prefix");
    out["model"] = model;
    const std::uint64_t n = uint_of(need(in, "n", "config"), "n");
    if (n < 2) throw ConfigError("n must be at least 2");
    out["n"] = n;
  } else {
    throw ConfigError("unknown experiment \"" + kind + "\"");
  }
  return out;
}

// ---- experiment handlers ----

struct HandlerOut {
  SeedArtifact art;
  json summary;  // first seed's copy is used; deterministic kinds agree across seeds
};

HandlerOut run_slln_seed(const json& doc, std::uint64_t seed) {
  const auto mu = law_of(doc.at("model"));
  const auto sched = schedule_of(doc.at("schedule"));
  const auto F = observable_of(doc.at("observable"), measures::law_alphabet(mu),
                               sched.arity());
  const std::uint64_t N = doc.at("N").get<std::uint64_t>();
  const auto checkpoints = uint_list(doc.at("checkpoints"));
  const auto stream = measures::sample_stream(mu, RngKey{seed, 0});

  nonconv::ConvergenceTrace tr;
  bool with_components = false;
  const auto fm = measures::finite_marginal(mu);
  if (fm && fm->exact) {
    const auto decomp = observables::decompose(F, *fm);
    tr = nonconv::run_components(stream, sched, decomp, F, N, checkpoints);
    with_components = true;
  } else {
    tr = nonconv::run_slln(stream, sched, F, mu, N, checkpoints);
  }

  std::string csv = "N,average,target";
  if (with_components)
    for (int i = 1; i <= sched.arity(); ++i) csv += ",component_" + std::to_string(i);
  csv += '\n';
  for (std::size_t c = 0; c < tr.checkpoints.size(); ++c) {
    csv += std::to_string(tr.checkpoints[c]);
    csv += ',';
    csv += fmt(tr.averages[c]);
    csv += ',';
    csv += fmt(tr.target);
    if (with_components)
      for (int i = 0; i < sched.arity(); ++i) {
        csv += ',';
        csv += fmt(tr.component_averages[i][c]);
      }
    csv += '\n';
  }

  HandlerOut out;
  out.art.seed = seed;
  out.art.csv = std::move(csv);
  out.art.value = tr.final_average();
  out.art.deviation = std::fabs(tr.final_average() - tr.target);
  out.summary["target"] = tr.target;
  out.summary["target_exact"] = tr.target_exact;
  out.summary["with_components"] = with_components;
  return out;
}

HandlerOut run_freq_seed(const json& doc, std::uint64_t seed) {
  const auto mu = law_of(doc.at("model"));
  const auto sched = schedule_of(doc.at("schedule"));
  const std::uint64_t N = doc.at("N").get<std::uint64_t>();
  const auto stream = measures::sample_stream(mu, RngKey{seed, 0});

  std::vector<nonconv::Word> words;
  if (doc.contains("words"))
    for (const auto& w : doc.at("words")) {
      nonconv::Word word;
      for (const auto& d : w) word.push_back(d.get<std::int64_t>());
      words.push_back(std::move(word));
    }
  const auto counts = nonconv::count_frequencies(stream, sched, words, N);

  HandlerOut out;
  out.art.seed = seed;
  std::string csv = "word,count,frequency,target,deviation\n";
  if (doc.contains("targets")) {
    const auto r = rat_vec(doc.at("targets").at("r"), "targets.r");
    std::vector<double> rd;
    rd.reserve(r.size());
    for (const auto& x : r) rd.push_back(to_double(x));
    const auto spec = nonconv::FrequencySpec::product_form(
        rd, doc.at("targets").at("first").get<std::int64_t>(), sched.arity());
    spec.validate();
    const auto rep = nonconv::check_membership(counts, N, spec);
    for (const auto& row : rep.rows) {
      csv += word_str(row.word) + ',' + std::to_string(row.count) + ',' + fmt(row.freq) +
             ',' + fmt(row.target) + ',' + fmt(row.deviation) + '\n';
    }
    out.art.value = rep.sup_deviation;
    out.art.deviation = rep.sup_deviation;
    out.summary["sup_deviation"] = rep.sup_deviation;
  } else {
    for (const auto& [word, count] : counts) {
      csv += word_str(word) + ',' + std::to_string(count) + ',' +
             fmt(static_cast<double>(count) / static_cast<double>(N)) + ",,\n";
    }
  }
  out.art.csv = std::move(csv);
  return out;
}

HandlerOut run_pair_seed(const json& doc, std::uint64_t seed) {
  const auto mu = law_of(doc.at("model"));
  const auto sched = schedule_of(doc.at("schedule"));
  const std::uint64_t N = doc.at("N").get<std::uint64_t>();
  const auto stream = measures::sample_stream(mu, RngKey{seed, 0});
  const auto counts = nonconv::count_pair_frequencies(stream, sched, N);

  const measures::MarkovLaw* markov = nullptr;
  if (doc.at("model").at("type").get<std::string>() == "markov-joint" && sched.arity() == 1)
    markov = std::get_if<measures::MarkovLaw>(&mu);

  HandlerOut out;
  out.art.seed = seed;
  double sup = 0;
  std::string csv = "pair,count,frequency,target,deviation\n";
  for (const auto& [pair, count] : counts) {
    const double freq = static_cast<double>(count) / static_cast<double>(N);
    csv += word_str(pair.first) + '|' + word_str(pair.second) + ',' +
           std::to_string(count) + ',' + fmt(freq);
    if (markov) {
      const auto x = pair.first[0], y = pair.second[0];
      const double t = (x >= 0 && x < markov->m && y >= 0 && y < markov->m)
                           ? to_double(markov->R[x][y])
                           : 0.0;
      const double dev = std::fabs(freq - t);
      sup = std::max(sup, dev);
      csv += ',' + fmt(t) + ',' + fmt(dev) + '\n';
    } else {
      csv += ",,\n";
    }
  }
  out.art.csv = std::move(csv);
  out.art.value = sup;
  out.art.deviation = markov ? sup : 0.0;
  if (markov) out.summary["sup_deviation"] = sup;
  return out;
}

fractal::DimensionResult dim_of_model(const json& model) {
  if (model.at("type").get<std::string>() == "bernoulli") {
    const auto r = rat_vec(model.at("weights"), "weights");
    return fractal::hd_bernoulli(r, static_cast<digits::Digit>(r.size()));
  }
  return fractal::hd_markov(rat_mat(model.at("R"), "R"));
}

HandlerOut run_dim_formula_seed(const json& doc, std::uint64_t seed) {
  const auto res = dim_of_model(doc.at("model"));
  HandlerOut out;
  out.art.seed = seed;
  out.art.csv = "quantity,value\ndimension," + fmt(res.value) + '\n';
  out.art.value = res.value;
  out.summary["value"] = res.value;
  out.summary["formula"] = res.formula;
  out.summary["zero_terms"] = res.zero_terms;
  return out;
}

HandlerOut run_dim_estimate_seed(const json& doc, std::uint64_t seed) {
  const auto mu = law_of(doc.at("model"));
  const auto res = dim_of_model(doc.at("model"));
  const auto grid = uint_list(doc.at("checkpoints"));
  const auto stream = measures::sample_stream(mu, RngKey{seed, 0});
  const auto tr = fractal::local_dimension_trace(mu, stream, grid);

  HandlerOut out;
  out.art.seed = seed;
  std::string csv = "n,estimate,target,deviation\n";
  for (const auto& row : tr.rows) {
    csv += std::to_string(row.n) + ',' + fmt(row.value) + ',' + fmt(res.value) + ',' +
           fmt(std::fabs(row.value - res.value)) + '\n';
  }
  out.art.csv = std::move(csv);
  const bool finite_end = !tr.rows.empty() && !tr.rows.back().zero;
  out.art.value = finite_end ? tr.final_value : std::numeric_limits<double>::infinity();
  out.art.deviation = finite_end ? std::fabs(tr.final_value - res.value)
                                 : std::numeric_limits<double>::infinity();
  out.summary["target"] = res.value;
  out.summary["hit_zero"] = tr.hit_zero;
  return out;
}

HandlerOut run_mixing_report_seed(const json& doc, std::uint64_t seed) {
  const auto chain = chain_of(doc.at("model"));
  const std::uint64_t n_max = doc.at("n_max").get<std::uint64_t>();
  const double p = to_double(parse_rational(doc.at("p").get<std::string>()));
  const double q = to_double(parse_rational(doc.at("q").get<std::string>()));
  const double delta = to_double(parse_rational(doc.at("delta").get<std::string>()));
  const auto rep = mixing::assumption_report(chain, p, q, n_max, delta);

  HandlerOut out;
  out.art.seed = seed;
  std::string csv = "n,psi,phi,alpha,rho\n";
  for (const auto& row : rep.coefficients.rows) {
    csv += std::to_string(row.n) + ',' + fmt(row.psi_d) + ',' + fmt(row.phi_d) + ',' +
           fmt(row.alpha_d) + ',' + fmt(row.rho) + '\n';
  }
  out.art.csv = std::move(csv);
  out.art.value = rep.coefficients.psi_decay.slope;

  json& s = out.summary;
  s["psi_decay"] = {{"slope", rep.coefficients.psi_decay.slope},
                    {"intercept", rep.coefficients.psi_decay.intercept},
                    {"r_squared", rep.coefficients.psi_decay.r_squared}};
  s["psi_all_zero"] = rep.coefficients.psi_all_zero;
  s["varpi_bounds"] = {{"from_alpha", rep.varpi_bounds.from_alpha},
                       {"from_rho", rep.varpi_bounds.from_rho},
                       {"from_phi", rep.varpi_bounds.from_phi},
                       {"from_psi", rep.varpi_bounds.from_psi},
                       {"minimum", rep.varpi_bounds.minimum},
                       {"argmin", rep.varpi_bounds.argmin}};
  s["varpi_labels"] = {rep.varpi_labels[0], rep.varpi_labels[1]};
  s["subscript_note"] = rep.subscript_note;
  s["beta_statement"] = rep.beta_statement;
  s["psi_size"] = {{"yes", rep.psi_size.yes},
                   {"mode", rep.psi_size.mode},
                   {"tail_slope", rep.psi_size.tail_slope},
                   {"sup_product", rep.psi_size.sup_product}};
  return out;
}

HandlerOut run_mixingale_seed(const json& doc, std::uint64_t seed) {
  const auto chain = chain_of(doc.at("model"));
  const auto sched = schedule_of(doc.at("schedule"));
  const measures::Law lawv = chain;
  const auto fm = measures::finite_marginal(lawv);
  const auto F = observable_of(doc.at("observable"), chain.obs_alpha, sched.arity());
  const auto decomp = observables::decompose(F, *fm);
  const int comp = doc.at("component").get<int>();
  const std::string mode = doc.at("mode").get<std::string>();

  HandlerOut out;
  out.art.seed = seed;
  mixing::DecayTable table;
  std::string csv;
  if (mode == "conditional") {
    const std::uint64_t n = doc.at("n").get<std::uint64_t>();
    const auto m_grid = uint_list(doc.at("m_grid"));
    table = mixing::mixingale_decay(chain, decomp, sched, comp, m_grid, n);
    csv = "m,norm_squared,norm,gap\n";
    for (std::size_t i = 0; i < table.grid.size(); ++i) {
      csv += std::to_string(table.grid[i]) + ',' + fmt(to_double(table.exact[i])) + ',' +
             fmt(table.value[i]) + ',' +
             std::to_string(mixing::theoretical_gap(sched, comp, table.grid[i], n)) + '\n';
    }
  } else {
    const auto n_grid = uint_list(doc.at("n_grid"));
    table = mixing::centering_decay(chain, decomp, sched, comp, n_grid);
    csv = "n,abs_centering\n";
    for (std::size_t i = 0; i < table.grid.size(); ++i)
      csv += std::to_string(table.grid[i]) + ',' + fmt(table.value[i]) + '\n';
  }
  out.art.csv = std::move(csv);
  out.art.value = table.fit.r_squared;
  out.summary["fit"] = {{"slope", table.fit.slope},
                        {"intercept", table.fit.intercept},
                        {"r_squared", table.fit.r_squared},
                        {"points", table.fit.points}};
  out.summary["all_zero"] = table.all_zero;
  return out;
}

HandlerOut run_construct_point_seed(const json& doc, std::uint64_t seed) {
  const json& model = doc.at("model");
  const std::uint64_t N = doc.at("N").get<std::uint64_t>();
  const std::string mode = doc.at("mode").get<std::string>();

  digits::DigitStream stream;
  if (model.at("type").get<std::string>() == "bernoulli") {
    stream = fractal::construct_up_point(
        std::get<measures::BernoulliLaw>(law_of(model)), RngKey{seed, 0});
  } else {
    stream = fractal::construct_up_point(cf_weights_of(model),
                                         mode == "iid" ? fractal::CfPointMode::Iid
                                                       : fractal::CfPointMode::Truncated,
                                         RngKey{seed, 0});
  }

  HandlerOut out;
  out.art.seed = seed;
  if (doc.contains("gzb")) {
    const auto sched = schedule_of(doc.at("schedule"));
    const auto b = parse_rational(doc.at("gzb").at("b").get<std::string>());
    const int k_max = doc.at("gzb").at("k_max").get<int>();
    auto res = fractal::construct_gzb(stream, b, sched, k_max);
    stream = res.stream;
    json ins = json::array();
    for (const auto& [idx, d] : res.insertions) ins.push_back({{"index", idx}, {"digit", d}});
    out.summary["insertions"] = ins;
  }

  std::string csv = "index,digit\n";
  for (std::uint64_t i = 0; i < N; ++i)
    csv += std::to_string(i) + ',' + std::to_string(stream.at(i)) + '\n';
  out.art.csv = std::move(csv);
  out.art.value = static_cast<double>(N);
  return out;
}

HandlerOut run_cf_bound_seed(const json& doc, std::uint64_t seed) {
  const auto rbar = cf_weights_of(doc.at("model"));
  const auto nu = measures::BernoulliLaw::from_weights(rbar.prefix, 1);
  const std::uint64_t n = doc.at("n").get<std::uint64_t>();
  const auto cert = fractal::cf_bound_certificate(nu, RngKey{seed, 0}, n, 1);

  HandlerOut out;
  out.art.seed = seed;
  out.art.csv = "n,lambda_hat,entropy,lower\n" + std::to_string(n) + ',' +
                fmt(cert.lambda_hat) + ',' + fmt(cert.entropy) + ',' + fmt(cert.lower) + '\n';
  out.art.value = cert.lambda_hat;
  out.summary["entropy"] = cert.entropy;
  out.summary["structural_lower"] = cert.structural_lower;
  return out;
}

HandlerOut run_one(const json& doc, std::uint64_t seed) {
  const std::string kind = doc.at("experiment").get<std::string>();
  if (kind == "slln-run") return run_slln_seed(doc, seed);
  if (kind == "freq-count") return run_freq_seed(doc, seed);
  if (kind == "pair-count") return run_pair_seed(doc, seed);
  if (kind == "dim-formula") return run_dim_formula_seed(doc, seed);
  if (kind == "dim-estimate") return run_dim_estimate_seed(doc, seed);
  if (kind == "mixing-report") return run_mixing_report_seed(doc, seed);
  if (kind == "mixingale-decay") return run_mixingale_seed(doc, seed);
  if (kind == "construct-point") return run_construct_point_seed(doc, seed);
  if (kind == "cf-bound") return run_cf_bound_seed(doc, seed);
  throw ConfigError("unknown experiment \"" + kind + "\"");
}

// schedule admissibility is checked before any seed work starts
void prevalidate(const json& doc) {
  if (!doc.contains("schedule")) return;
  const auto sched = schedule_of(doc.at("schedule"));
  std::int64_t n_max = 16;
  if (doc.contains("N"))
    n_max = static_cast<std::int64_t>(doc.at("N").get<std::uint64_t>());
  else if (doc.contains("n"))
    n_max = static_cast<std::int64_t>(doc.at("n").get<std::uint64_t>());
  else if (doc.contains("gzb"))
    n_max = static_cast<std::int64_t>(doc.at("gzb").at("k_max").get<std::uint64_t>());
  if (n_max < 1) n_max = 1;
  const auto rep = schedules::validate(sched, n_max);
  if (!rep.ok)
    throw ValidationError("inadmissible schedule at (i=" + std::to_string(rep.violating_i) +
                          ", n=" + std::to_string(rep.violating_n) + "): " + rep.reason);
}

}  // namespace

const char* tool_version() { return kVersion; }

RunConfig RunConfig::from_text(const std::string& text, const Overrides& o) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (o.seed_range) {
    const auto [a, b] = *o.seed_range;
    if (b < a) throw ConfigError("seed range end is below its start");
    if (b - a >= 100000) throw ConfigError("more than 1e5 seeds");
    json seeds = json::array();
    for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    in["seeds"] = seeds;
  }
  if (o.experiment && in.contains("experiment") &&
      in["experiment"].get<std::string>() != *o.experiment)
    throw ConfigError("config experiment \"" + in["experiment"].get<std::string>() +
                      "\" does not match the subcommand \"" + *o.experiment + "\"");

  RunConfig cfg;
  cfg.outdir = o.outdir ? *o.outdir
                        : (in.contains("out") ? in["out"].get<std::string>()
                                              : std::string("runs"));
  in.erase("out");
  const json doc = canonicalize(in);
  cfg.experiment = doc.at("experiment").get<std::string>();
  cfg.canonical = doc.dump(2) + "\n";
  cfg.hash = fnv1a64_hex(cfg.canonical);
  cfg.seeds = uint_list(doc.at("seeds"));
  return cfg;
}

RunConfig RunConfig::load(const std::string& path, const Overrides& o) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return from_text(text, o);
}

RunResult execute(const RunConfig& cfg, int threads) {
  const json doc = json::parse(cfg.canonical);
  prevalidate(doc);

  const std::size_t count = cfg.seeds.size();
  std::vector<HandlerOut> outs(count);
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) outs[i] = run_one(doc, cfg.seeds[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    auto work = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          outs[i] = run_one(doc, cfg.seeds[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  RunResult res;
  res.config = cfg;
  res.per_seed.reserve(count);
  double sum = 0, mx = 0;
  json per_seed = json::array();
  for (auto& h : outs) {
    sum += h.art.deviation;
    mx = std::max(mx, h.art.deviation);
    per_seed.push_back({{"seed", h.art.seed},
                        {"value", h.art.value},
                        {"deviation", h.art.deviation}});
    res.per_seed.push_back(std::move(h.art));
  }
  res.mean_abs_deviation = count ? sum / static_cast<double>(count) : 0;
  res.max_abs_deviation = mx;

  json report;
  report["config"] = doc;
  report["config_hash"] = cfg.hash;
  report["experiment"] = cfg.experiment;
  report["mean_abs_deviation"] = res.mean_abs_deviation;
  report["max_abs_deviation"] = res.max_abs_deviation;
  report["per_seed"] = per_seed;
  json seeds = json::array();
  for (auto s : cfg.seeds) seeds.push_back(s);
  report["seeds"] = seeds;
  report["summary"] = outs.empty() ? json::object() : outs.front().summary;
  report["tool_version"] = tool_version();
  res.report_json = report.dump(2) + "\n";
  return res;
}

std::string write_artifacts(const RunResult& res) {
  const fs::path dir = fs::path(res.config.outdir) / res.config.hash;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  for (const auto& art : res.per_seed) {
    const fs::path p = dir / (std::to_string(art.seed) + ".csv");
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << art.csv;
  }
  std::ofstream f(dir / "report.json", std::ios::binary);
  if (!f) throw ConfigError("cannot write " + (dir / "report.json").string());
  f << res.report_json;
  return dir.string();
}

ReplayResult replay(const std::string& report_path, int threads) {
  std::ifstream f(report_path, std::ios::binary);
  if (!f) throw ConfigError("cannot read report " + report_path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  json report;
  try {
    report = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  cfg.experiment = need(report, "experiment", "report").get<std::string>();
  cfg.canonical = need(report, "config", "report").dump(2) + "\n";
  cfg.hash = fnv1a64_hex(cfg.canonical);
  if (cfg.hash != need(report, "config_hash", "report").get<std::string>())
    throw ValidationError("the stamped config does not match its digest; the report was edited");
  cfg.seeds = uint_list(need(report, "seeds", "report"));
  cfg.outdir = fs::path(report_path).parent_path().parent_path().string();

  ReplayResult out;
  const std::string stamped = need(report, "tool_version", "report").get<std::string>();
  if (stamped != tool_version())
    out.version_warning = "report was produced by version " + stamped +
                          ", this tool is version " + tool_version();

  const auto res = execute(cfg, threads);
  const fs::path dir = fs::path(report_path).parent_path();
  for (const auto& art : res.per_seed) {
    const fs::path p = dir / (std::to_string(art.seed) + ".csv");
    std::ifstream cf(p, std::ios::binary);
    if (!cf) {
      out.mismatches.push_back({art.seed, 0, "", "<missing file>"});
      continue;
    }
    std::string disk((std::istreambuf_iterator<char>(cf)), std::istreambuf_iterator<char>());
    if (disk == art.csv) continue;
    // locate the first differing row for the verdict
    std::size_t row = 1, i = 0, j = 0;
    ReplayMismatch mm;
    mm.seed = art.seed;
    for (;;) {
      std::size_t ie = art.csv.find('\n', i);
      std::size_t je = disk.find('\n', j);
      const std::string a = art.csv.substr(i, (ie == std::string::npos ? art.csv.size() : ie) - i);
      const std::string b = disk.substr(j, (je == std::string::npos ? disk.size() : je) - j);
      if (a != b) {
        mm.row = row;
        mm.expected = a;
        mm.actual = b;
        break;
      }
      if (ie == std::string::npos || je == std::string::npos) {
        mm.row = row;
        mm.expected = ie == std::string::npos ? "<end of file>" : "<more rows>";
        mm.actual = je == std::string::npos ? "<end of file>" : "<more rows>";
        break;
      }
      i = ie + 1;
      j = je + 1;
      ++row;
    }
    out.mismatches.push_back(std::move(mm));
  }
  out.ok = out.mismatches.empty();
  return out;
}

}  // namespace freqdim::runner
