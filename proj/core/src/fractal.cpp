#include "freqdim/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "freqdim/errors.hpp"

namespace freqdim::fractal {
namespace {

void require_prob_vector(const std::vector<Rational>& r, Digit m) {
  if (m < 2) throw ValidationError("alphabet size must be at least 2");
  if (static_cast<Digit>(r.size()) != m)
    throw ValidationError("frequency vector length " + std::to_string(r.size()) +
                          " does not match alphabet size " + std::to_string(m));
  Rational sum = 0;
  for (const auto& x : r) {
    if (x < 0) throw ValidationError("negative frequency entry");
    sum += x;
  }
  if (sum != 1) throw ValidationError("frequencies must sum to exactly 1, got " +
                                      format_rational(sum));
}

// -sum_{w>0} w ln w in doubles from exact weights
double entropy_of(const std::vector<Rational>& w) {
  double h = 0;
  for (const auto& x : w)
    if (x > 0) h -= to_double(x) * ln_rational(x);
  return h;
}

BigInt ceil_rational(const Rational& x) {
  BigInt n = numerator(x), d = denominator(x);
  if (n <= 0) throw ValidationError("expected a positive value");
  return (n + d - 1) / d;
}

BigInt floor_rational(const Rational& x) { return numerator(x) / denominator(x); }

}  // namespace

DimensionResult hd_bernoulli(const std::vector<Rational>& r, Digit m) {
  require_prob_vector(r, m);
  DimensionResult out;
  out.formula = "bernoulli-entropy";
  out.inputs_echo.reserve(r.size());
  for (const auto& x : r) out.inputs_echo.push_back(to_double(x));

  const Rational unif(BigInt(1), BigInt(m));
  bool uniform = true;
  for (const auto& x : r) {
    if (x == 0) ++out.zero_terms;
    if (x != unif) uniform = false;
  }
  if (uniform) {
    out.value = 1.0;  // entropy is ln m identically
    return out;
  }
  out.value = entropy_of(r) / std::log(static_cast<double>(m));
  return out;
}

DimensionResult hd_markov(const std::vector<std::vector<Rational>>& R) {
  const auto law = measures::MarkovLaw::from_joint(R);
  DimensionResult out;
  out.formula = "markov-entropy";
  for (const auto& row : law.R)
    for (const auto& x : row) out.inputs_echo.push_back(to_double(x));

  const Rational unif(BigInt(1), BigInt(law.m));
  bool uniform = true;
  double h = 0;
  for (Digit i = 0; i < law.m; ++i) {
    for (Digit j = 0; j < law.m; ++j) {
      const Rational& rij = law.R[i][j];  // rij = q_i Q_ij exactly
      if (law.Q[i][j] != unif) uniform = false;
      if (rij == 0) {
        ++out.zero_terms;
        continue;
      }
      h -= to_double(rij) * ln_rational(law.Q[i][j]);
    }
  }
  out.value = uniform ? 1.0 : h / std::log(static_cast<double>(law.m));
  return out;
}

PerturbedVector perturb_bernoulli(const std::vector<Rational>& r, const Rational& delta) {
  const Digit m = static_cast<Digit>(r.size());
  require_prob_vector(r, m);
  if (delta <= 0) throw ValidationError("perturbation size must be positive");

  PerturbedVector out;
  out.r = r;
  out.delta = delta;
  for (const auto& x : r) (x > 0 ? out.k : out.l)++;

  out.hd_original = hd_bernoulli(r, m).value;
  if (out.l == 0) {
    out.noop = true;
    out.valid = true;
    out.r_delta = r;
    out.mixed_entropy = out.perturbed_entropy = entropy_of(r);
    out.hd_perturbed = out.hd_original;
    return out;
  }

  const Rational dk = delta / BigInt(out.k);
  const Rational dl = delta / BigInt(out.l);
  out.r_delta.reserve(r.size());
  bool positive = true;
  Rational reduced_prod = 1;
  bool strict = true;
  for (const auto& x : r) {
    if (x > 0) {
      Rational red = x - dk;
      if (red <= 0) positive = false;
      if (x <= dk) strict = false;
      if (positive) reduced_prod *= red;
      out.r_delta.push_back(std::move(red));
    } else {
      out.r_delta.push_back(dl);
    }
  }
  // smallness in exact exponentiated form: (delta/l)^k <= prod (r_j - delta/k)
  out.valid = positive && strict &&
              pow_rational(dl, static_cast<unsigned>(out.k)) <= reduced_prod;

  if (positive) {
    double mixed = 0;
    for (std::size_t j = 0; j < r.size(); ++j)
      if (r[j] > 0) mixed -= to_double(r[j]) * ln_rational(out.r_delta[j]);
    out.mixed_entropy = mixed;
    out.perturbed_entropy = entropy_of(out.r_delta);
    out.hd_perturbed = hd_bernoulli(out.r_delta, m).value;
  }
  return out;
}

PerturbedMatrix perturb_markov(const std::vector<std::vector<Rational>>& R,
                               const Rational& delta) {
  const auto law = measures::MarkovLaw::from_joint(R);
  if (delta <= 0) throw ValidationError("perturbation size must be positive");
  const Digit m = law.m;

  PerturbedMatrix out;
  out.R = law.R;
  out.delta = delta;
  out.q = law.q;
  out.hd_original = hd_markov(R).value;
  out.note = "display_bound is a heuristic diagnostic only; the dimension values "
             "come from the entropy formulas";

  out.k.assign(m, 0);
  out.l.assign(m, 0);
  out.row_noop.assign(m, false);
  out.R_delta.resize(m);
  bool positive = true;
  bool all_valid = true;
  bool any_perturbed = false;
  for (Digit i = 0; i < m; ++i) {
    for (const auto& x : law.R[i]) (x > 0 ? out.k[i] : out.l[i])++;
    if (out.l[i] == 0) {
      // an untouched row keeps its marginal exactly; spreading delta here would
      // break the row sum
      out.row_noop[i] = true;
      out.R_delta[i] = law.R[i];
      continue;
    }
    any_perturbed = true;
    const Rational dk = delta / BigInt(out.k[i]);
    const Rational dl = delta / BigInt(out.l[i]);
    Rational scaled_prod = 1;  // prod (r_ij - delta/k_i)/q_i over positive r_ij
    bool row_pos = true, row_strict = true;
    auto& row = out.R_delta[i];
    row.reserve(m);
    for (const auto& x : law.R[i]) {
      if (x > 0) {
        Rational red = x - dk;
        if (red <= 0) row_pos = false;
        if (x <= dk) row_strict = false;
        if (row_pos) scaled_prod *= red / law.q[i];
        row.push_back(std::move(red));
      } else {
        row.push_back(dl);
      }
    }
    positive = positive && row_pos;
    const bool row_valid =
        row_pos && row_strict &&
        pow_rational(dl, static_cast<unsigned>(out.k[i])) <= scaled_prod;
    all_valid = all_valid && row_valid;
  }
  out.noop = !any_perturbed;
  out.valid = positive && all_valid;
  if (!positive) return out;

  out.Q_delta.resize(m);
  for (Digit i = 0; i < m; ++i) {
    auto& row = out.Q_delta[i];
    row.reserve(m);
    for (const auto& x : out.R_delta[i]) row.push_back(x / law.q[i]);
  }
  const auto chain = measures::FiniteMarkovChain::from_transition(out.Q_delta);
  out.q_delta = chain.pi;

  double mixed = 0, perturbed = 0, hdp = 0, bound = 0;
  for (Digit i = 0; i < m; ++i) {
    const double factor =
        std::max(1.0, to_double(out.q_delta[i]) / to_double(law.q[i]));
    for (Digit j = 0; j < m; ++j) {
      const Rational& qd = out.Q_delta[i][j];
      if (qd == 0) continue;  // only in untouched rows
      const double lq = ln_rational(qd);
      if (law.R[i][j] > 0) mixed -= to_double(law.R[i][j]) * lq;
      if (out.R_delta[i][j] > 0) {
        perturbed -= to_double(out.R_delta[i][j]) * lq;
        bound -= to_double(out.R_delta[i][j]) * factor * lq;
      }
      hdp -= to_double(out.q_delta[i] * qd) * lq;
    }
  }
  out.mixed_entropy = mixed;
  out.perturbed_entropy = perturbed;
  out.display_bound = bound;
  out.hd_perturbed = hdp / std::log(static_cast<double>(m));
  return out;
}

LocalDimTrace local_dimension_trace(const measures::Law& law, const DigitStream& stream,
                                    std::span<const std::uint64_t> n_grid) {
  const auto alpha = measures::law_alphabet(law);
  if (!alpha.finite)
    throw ValidationError("mass-scaling traces need a finite alphabet so cylinder "
                          "lengths are powers of the base");
  if (alpha.size < 2) throw ValidationError("alphabet size must be at least 2");
  if (n_grid.empty()) throw ValidationError("empty depth grid");

  std::vector<std::uint64_t> grid(n_grid.begin(), n_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() == 0) throw ValidationError("cylinder depth must be positive");
  if (grid.back() > 100'000'000ull)
    throw ResourceCapError("cylinder depth beyond 1e8");

  const std::uint64_t nmax = grid.back();
  std::vector<Digit> buf(nmax);
  for (std::uint64_t i = 0; i < nmax; ++i) buf[i] = stream.at(i);

  LocalDimTrace out;
  const double lm = std::log(static_cast<double>(alpha.size));
  for (std::uint64_t n : grid) {
    const auto mr = measures::cylinder_mass(law, std::span<const Digit>(buf.data(), n));
    if (mr.zero) {
      out.rows.push_back({n, std::numeric_limits<double>::infinity(), true});
      out.hit_zero = true;
      break;
    }
    const double v = -mr.log_mass / (static_cast<double>(n) * lm);
    out.rows.push_back({n, v, false});
    out.final_value = v;
  }
  return out;
}

DigitStream construct_up_point(const measures::BernoulliLaw& r, RngKey key) {
  return measures::sample_stream(measures::Law(r), key);
}

DigitStream construct_up_point(const measures::DigitWeightSeq& rbar, CfPointMode mode,
                               RngKey key) {
  return mode == CfPointMode::Iid ? measures::iid_cf_stream(rbar, key)
                                  : measures::truncated_cf_stream(rbar, key);
}

GzbResult construct_gzb(const DigitStream& z, const Rational& b,
                        const schedules::Schedule& sched, int k_max) {
  if (z.alphabet().finite && z.alphabet().first < 1)
    throw ValidationError("insertion targets live in the positive-integer digit space");
  if (b <= 1) throw ValidationError("growth base must exceed 1");
  if (k_max < 0 || k_max > 1000)
    throw ValidationError("insertion count must lie in [0, 1000]");

  const int ell = static_cast<int>(sched.arity());
  std::vector<std::pair<std::uint64_t, Digit>> ins;
  ins.reserve(static_cast<std::size_t>(k_max));
  const BigInt digit_cap = BigInt(std::numeric_limits<Digit>::max());
  for (int k = 1; k <= k_max; ++k) {
    const std::uint64_t k2 = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(k);
    std::vector<std::uint64_t> excluded;
    excluded.reserve(sched.q.size());
    for (const auto& fn : sched.q)
      excluded.push_back(static_cast<std::uint64_t>(fn.eval(static_cast<std::uint64_t>(k))));
    std::uint64_t idx = 0;
    bool found = false;
    for (int off = 0; off <= ell; ++off) {
      const std::uint64_t cand = k2 + static_cast<std::uint64_t>(off);
      if (std::find(excluded.begin(), excluded.end(), cand) == excluded.end()) {
        idx = cand;
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("no insertion slot near k^2 for k=" + std::to_string(k));
    if (!ins.empty() && idx <= ins.back().first)
      throw ValidationError("insertion indices collide at k=" + std::to_string(k) +
                            "; the squares are too close for this schedule arity");

    const Rational pw = pow_rational(b, static_cast<unsigned>(k2));
    BigInt d = ceil_rational(Rational(BigInt(3), BigInt(2)) * pw);
    if (!(Rational(d) > pw && Rational(d) < 2 * pw)) {
      // midpoint ceiling grazes the right endpoint only when pw < 2; the least
      // integer above pw is then interior
      d = floor_rational(pw) + 1;
      if (!(Rational(d) > pw && Rational(d) < 2 * pw))
        throw ValidationError("no integer strictly inside the insertion window at k=" +
                              std::to_string(k));
    }
    if (d > digit_cap)
      throw ResourceCapError("inserted digit exceeds 63 bits at k=" + std::to_string(k));
    ins.emplace_back(idx, static_cast<Digit>(d));
  }

  GzbResult out;
  out.insertions = ins;
  if (ins.empty()) {
    out.stream = z;
  } else {
    // inserted digits are unbounded, so the result lives on the full
    // positive-integer alphabet whatever the base stream's support was
    DigitStream wide = z;
    if (z.alphabet().finite)
      wide = DigitStream::pure_generator(digits::Alphabet::positive_integers(),
                                         [z](std::uint64_t i) { return z.at(i); });
    out.stream = DigitStream::with_overrides(wide, std::move(ins));
  }
  return out;
}

CfCertificate cf_bound_certificate(const measures::BernoulliLaw& nu, RngKey key,
                                   std::uint64_t n, int num_seeds) {
  if (!nu.alpha.finite || nu.alpha.first != 1)
    throw ValidationError("the digit law must have finite support on {1, 2, ...}");
  if (n < 2) throw ValidationError("need at least 2 digits");
  if (n > 1'000'000) throw ResourceCapError("digit count beyond 1e6");
  if (num_seeds < 1) throw ValidationError("need at least one seed");

  CfCertificate out;
  out.n = n;
  out.seeds = num_seeds;
  if (nu.exact) {
    out.entropy = entropy_of(nu.w);
  } else {
    for (double w : nu.wd)
      if (w > 0) out.entropy -= w * std::log(w);
  }

  double sum = 0, sumsq = 0;
  std::vector<Digit> buf(n);
  for (int s = 0; s < num_seeds; ++s) {
    const auto stream =
        measures::sample_stream(measures::Law(nu), RngKey{key.seed, key.stream + s});
    for (std::uint64_t i = 0; i < n; ++i) buf[i] = stream.at(i);
    const auto conts = digits::continuants(buf);
    const double lam = 2.0 * ln_bigint(conts.back().second) / static_cast<double>(n);
    sum += lam;
    sumsq += lam * lam;
  }
  out.lambda_hat = sum / num_seeds;
  if (num_seeds > 1) {
    const double var =
        std::max(0.0, (sumsq - sum * sum / num_seeds) / (num_seeds - 1)) / num_seeds;
    out.lambda_stderr = std::sqrt(var);
  }
  out.noisy = out.lambda_stderr > 0.01 * out.lambda_hat;
  out.lower = std::min(1.0, std::max(0.5, out.entropy / out.lambda_hat));
  return out;
}

}  // namespace freqdim::fractal
