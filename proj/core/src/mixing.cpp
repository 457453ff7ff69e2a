#include "freqdim/mixing.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "freqdim/errors.hpp"

namespace freqdim::mixing {

namespace {

Rational rabs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

void require_mixing_chain(const FiniteMarkovChain& c) {
  if (!c.primitive)
    throw ValidationError("mixing coefficients need a primitive (irreducible aperiodic) chain");
  for (int i = 0; i < c.s; ++i)
    if (c.obs[static_cast<std::size_t>(i)] != i)
      throw ValidationError("mixing coefficients need the identity observation");
}

Matrix identity(std::size_t s) {
  Matrix I(s, std::vector<Rational>(s, Rational(0)));
  for (std::size_t i = 0; i < s; ++i) I[i][i] = 1;
  return I;
}

// power cache shared across the gaps of one computation
struct PowCache {
  const Matrix* base;
  std::map<std::uint64_t, Matrix> memo;
  const Matrix& at(std::uint64_t n) {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    return memo.emplace(n, mat_pow(*base, n)).first->second;
  }
};

}  // namespace

Matrix mat_mul(const Matrix& A, const Matrix& B) {
  const std::size_t n = A.size(), k = B.size(), m = B.empty() ? 0 : B[0].size();
  Matrix C(n, std::vector<Rational>(m, Rational(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      if (A[i][t] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) C[i][j] += A[i][t] * B[t][j];
    }
  return C;
}

Matrix mat_pow(const Matrix& P, std::uint64_t n) {
  Matrix acc = identity(P.size());
  Matrix sq = P;
  while (n > 0) {
    if (n & 1) acc = mat_mul(acc, sq);
    n >>= 1;
    if (n > 0) sq = mat_mul(sq, sq);
  }
  return acc;
}

Rational markov_psi(const FiniteMarkovChain& c, std::uint64_t n) {
  require_mixing_chain(c);
  if (n == 0) throw ValidationError("need n >= 1");
  const auto Pn = mat_pow(c.P, n);
  Rational best = 0;
  for (int i = 0; i < c.s; ++i)
    for (int j = 0; j < c.s; ++j) {
      const auto& pj = c.pi[static_cast<std::size_t>(j)];
      Rational v = rabs(Pn[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / pj - 1);
      if (v > best) best = v;
    }
  return best;
}

Rational markov_phi(const FiniteMarkovChain& c, std::uint64_t n) {
  require_mixing_chain(c);
  if (n == 0) throw ValidationError("need n >= 1");
  const auto Pn = mat_pow(c.P, n);
  Rational best = 0;
  for (int i = 0; i < c.s; ++i) {
    Rational l1 = 0;
    for (int j = 0; j < c.s; ++j)
      l1 += rabs(Pn[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                 c.pi[static_cast<std::size_t>(j)]);
    l1 /= 2;
    if (l1 > best) best = l1;
  }
  return best;
}

Rational markov_alpha(const FiniteMarkovChain& c, std::uint64_t n) {
  require_mixing_chain(c);
  if (n == 0) throw ValidationError("need n >= 1");
  if (c.s > 16) throw ResourceCapError("subset enumeration capped at 16 states");
  const auto Pn = mat_pow(c.P, n);
  const std::size_t s = static_cast<std::size_t>(c.s);
  Matrix C(s, std::vector<Rational>(s));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) C[i][j] = c.pi[i] * Pn[i][j] - c.pi[i] * c.pi[j];
  // walk subsets S in Gray-code order, keeping column sums over S
  std::vector<Rational> col(s, Rational(0));
  std::uint32_t prev = 0;
  Rational best = 0;
  for (std::uint32_t g = 1; g < (1u << s); ++g) {
    const std::uint32_t gray = g ^ (g >> 1);
    const std::uint32_t diff = gray ^ prev;
    const std::size_t bit = static_cast<std::size_t>(__builtin_ctz(diff));
    if (gray & diff)
      for (std::size_t j = 0; j < s; ++j) col[j] += C[bit][j];
    else
      for (std::size_t j = 0; j < s; ++j) col[j] -= C[bit][j];
    prev = gray;
    Rational pos = 0, neg = 0;
    for (std::size_t j = 0; j < s; ++j) {
      if (col[j] > 0) pos += col[j];
      if (col[j] < 0) neg -= col[j];
    }
    if (pos > best) best = pos;
    if (neg > best) best = neg;
  }
  return best;
}

double markov_rho(const FiniteMarkovChain& c, std::uint64_t n) {
  require_mixing_chain(c);
  if (n == 0) throw ValidationError("need n >= 1");
  const auto Pn = mat_pow(c.P, n);
  const int s = c.s;
  Eigen::MatrixXd M(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      const double pi_i = to_double(c.pi[static_cast<std::size_t>(i)]);
      const double pi_j = to_double(c.pi[static_cast<std::size_t>(j)]);
      const double pn = to_double(Pn[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      M(i, j) = (pi_i * pn - pi_i * pi_j) / std::sqrt(pi_i * pi_j);
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

Rational brute_force_psi(const FiniteMarkovChain& c, std::uint64_t n, int horizon) {
  require_mixing_chain(c);
  if (n == 0 || horizon < 1) throw ValidationError("need n >= 1 and horizon >= 1");
  const std::size_t s = static_cast<std::size_t>(c.s);
  std::size_t words = 1;
  for (int t = 0; t < horizon; ++t) {
    if (words > std::size_t{100'000} / s) throw ResourceCapError("word enumeration exceeds 100000");
    words *= s;
  }
  if (words > std::size_t{1'000'000} / words)
    throw ResourceCapError("word-pair enumeration exceeds 1000000");

  // path probability of each word, plus its endpoint states
  std::vector<Rational> prob(words);
  std::vector<std::size_t> first(words), last(words);
  std::vector<std::size_t> w(static_cast<std::size_t>(horizon));
  for (std::size_t idx = 0; idx < words; ++idx) {
    std::size_t rest = idx;
    for (int t = horizon - 1; t >= 0; --t) {
      w[static_cast<std::size_t>(t)] = rest % s;
      rest /= s;
    }
    Rational p = c.pi[w[0]];
    for (int t = 0; t + 1 < horizon; ++t)
      p *= c.P[w[static_cast<std::size_t>(t)]][w[static_cast<std::size_t>(t + 1)]];
    prob[idx] = p;
    first[idx] = w[0];
    last[idx] = w[static_cast<std::size_t>(horizon - 1)];
  }
  const auto Pn = mat_pow(c.P, n);
  Rational best = 0;
  for (std::size_t ia = 0; ia < words; ++ia) {
    if (prob[ia] == 0) continue;
    for (std::size_t ib = 0; ib < words; ++ib) {
      if (prob[ib] == 0) continue;
      // joint path probability: past word, n-step bridge, future word
      const Rational joint = prob[ia] * Pn[last[ia]][first[ib]] * (prob[ib] / c.pi[first[ib]]);
      Rational v = rabs(joint / (prob[ia] * prob[ib]) - 1);
      if (v > best) best = v;
    }
  }
  return best;
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ValidationError("fit needs at least two (x, y) points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-30) throw ValidationError("degenerate fit: all x equal");
  LinearFit f;
  f.points = xs.size();
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = f.slope * xs[i] + f.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  f.r_squared = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
  return f;
}

MixingReport mixing_report(const FiniteMarkovChain& c, std::uint64_t n_max) {
  if (n_max < 1) throw ValidationError("need n_max >= 1");
  MixingReport rep;
  std::vector<double> xs, ys;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    CoefficientRow row;
    row.n = n;
    row.psi = markov_psi(c, n);
    row.phi = markov_phi(c, n);
    row.alpha = markov_alpha(c, n);
    row.rho = markov_rho(c, n);
    row.psi_d = to_double(row.psi);
    row.phi_d = to_double(row.phi);
    row.alpha_d = to_double(row.alpha);
    if (row.psi > 0) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(row.psi_d));
    }
    rep.rows.push_back(std::move(row));
  }
  rep.psi_all_zero = xs.empty();
  if (xs.size() >= 2) rep.psi_decay = linear_fit(xs, ys);
  return rep;
}

BoundSet interpolation_bounds(double alpha, double rho, double phi, double psi, double p,
                              double q) {
  if (!(p >= 1 && q >= p)) throw ValidationError("need 1 <= p <= q");
  BoundSet b;
  b.from_alpha = std::pow(2 * alpha, 1 / p - 1 / q);
  b.from_rho = std::pow(2.0, 1 + 1 / p - 1 / q) * std::pow(rho, 1 - 1 / p + 1 / q);
  b.from_phi = std::pow(2.0, 1 + 1 / p) * std::pow(phi, 1 - 1 / p);
  b.from_psi = psi;
  b.minimum = b.from_alpha;
  b.argmin = "alpha";
  if (b.from_rho < b.minimum) b.minimum = b.from_rho, b.argmin = "rho";
  if (b.from_phi < b.minimum) b.minimum = b.from_phi, b.argmin = "phi";
  if (b.from_psi < b.minimum) b.minimum = b.from_psi, b.argmin = "psi";
  return b;
}

SizeHalfReport size_minus_half(const std::function<double(std::uint64_t)>& a,
                               std::uint64_t n_max, double delta) {
  if (delta <= 0) throw ValidationError("need delta > 0");
  if (n_max < 16) throw ValidationError("need n_max >= 16");
  if (n_max > 10'000'000) throw ResourceCapError("size verdict scan capped at 10000000");
  auto L = [&](std::uint64_t n) {
    const double ln = std::log(static_cast<double>(n));
    return ln * std::pow(std::log(ln), 1 + delta);
  };
  SizeHalfReport rep;
  rep.delta = delta;
  rep.argmax = 3;
  for (std::uint64_t n = 3; n <= n_max; ++n) {
    const double an = a(n);
    if (an < 0) throw ValidationError("sequence must be nonnegative");
    const double b = an * std::sqrt(static_cast<double>(n)) * L(n);
    if (b > rep.sup_product) {
      rep.sup_product = b;
      rep.argmax = n;
    }
  }
  // tail behavior on the last window
  const std::uint64_t wlo = n_max - 15;
  bool tail_zero = true;
  for (std::uint64_t n = wlo; n <= n_max; ++n) tail_zero = tail_zero && a(n) == 0.0;
  if (tail_zero) {
    rep.yes = true;
    rep.mode = "eventually-zero";
    return rep;
  }
  bool exp_ok = true;
  double rmin = 1e300, rmax = 0;
  for (std::uint64_t n = wlo; n < n_max && exp_ok; ++n) {
    const double cur = a(n), nxt = a(n + 1);
    if (cur <= 0 || nxt <= 0) {
      exp_ok = false;
      break;
    }
    const double r = nxt / cur;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  if (exp_ok && rmax <= 0.999 && rmax / rmin <= 1.05) {
    rep.yes = true;
    rep.mode = "exponential";
    rep.tail_slope = std::log(rmax);
    return rep;
  }
  // log-log slope of the weighted product over a geometric tail grid
  const double lo = std::max(3.0, std::sqrt(static_cast<double>(n_max)));
  const double hi = static_cast<double>(n_max);
  std::vector<double> xs, ys;
  const int K = 24;
  std::uint64_t prev = 0;
  for (int k = 0; k <= K; ++k) {
    const double t = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / K);
    const std::uint64_t n = std::min<std::uint64_t>(n_max, static_cast<std::uint64_t>(t + 0.5));
    if (n == prev) continue;
    prev = n;
    const double b = a(n) * std::sqrt(static_cast<double>(n)) * L(n);
    if (b <= 0) continue;
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(b));
  }
  if (xs.size() < 4) {
    rep.mode = "inconclusive";
    return rep;
  }
  const auto fit = linear_fit(xs, ys);
  rep.tail_slope = fit.slope;
  if (fit.slope <= -0.05) {
    rep.yes = true;
    rep.mode = "bounded-product";
  } else if (fit.slope >= 0.05) {
    rep.mode = "diverging-product";
  } else if (rep.argmax < wlo) {
    // flat tail with the running sup attained earlier: bounded
    rep.yes = true;
    rep.mode = "bounded-product";
  } else {
    rep.mode = "inconclusive";
  }
  return rep;
}

std::int64_t theoretical_gap(const schedules::Schedule& sched, int i, std::uint64_t m,
                             std::uint64_t n) {
  if (i < 1 || i > sched.arity()) throw ValidationError("component index out of range");
  auto floor3 = [](std::int64_t v) { return v >= 0 ? v / 3 : -((-v + 2) / 3); };
  const auto qi = sched.q[static_cast<std::size_t>(i - 1)].eval(static_cast<std::int64_t>(n));
  std::int64_t gap = std::numeric_limits<std::int64_t>::max();
  if (i >= 2) {
    const auto qprev =
        sched.q[static_cast<std::size_t>(i - 2)].eval(static_cast<std::int64_t>(n));
    gap = std::min(gap, floor3(qi - qprev));
  }
  if (m <= n) {
    const auto qlag = sched.q[static_cast<std::size_t>(i - 1)].eval(
        static_cast<std::int64_t>(n) - static_cast<std::int64_t>(m));
    gap = std::min(gap, floor3(qi - qlag));
  }
  return gap;
}

namespace {

struct ComponentSetup {
  std::size_t s;
  std::vector<std::int64_t> times;  // q_1(n)..q_i(n)
  const std::vector<Rational>* comp;
};

ComponentSetup component_setup(const FiniteMarkovChain& c,
                               const observables::Decomposition& decomp,
                               const schedules::Schedule& sched, int i, std::uint64_t n) {
  require_mixing_chain(c);
  if (c.s > 16) throw ResourceCapError("conditional-expectation chains capped at 16 states");
  if (!decomp.exact) throw ValidationError("need an exact decomposition");
  if (i < 1 || i > decomp.arity || i > sched.arity())
    throw ValidationError("component index out of range");
  if (!(decomp.alpha == digits::Alphabet::base(c.s)))
    throw ValidationError("decomposition alphabet does not match the chain states");
  ComponentSetup st;
  st.s = static_cast<std::size_t>(c.s);
  for (int j = 1; j <= i; ++j)
    st.times.push_back(sched.q[static_cast<std::size_t>(j - 1)].eval(static_cast<std::int64_t>(n)));
  std::size_t cells = 1;
  for (int j = 0; j < i; ++j) {
    if (cells > std::size_t{1'000'000} / st.s)
      throw ResourceCapError("state-tuple enumeration exceeds 1000000");
    cells *= st.s;
  }
  st.comp = &decomp.comp[static_cast<std::size_t>(i - 1)];
  return st;
}

}  // namespace

Rational centering_value(const FiniteMarkovChain& c, const observables::Decomposition& decomp,
                         const schedules::Schedule& sched, int i, std::uint64_t n) {
  auto st = component_setup(c, decomp, sched, i, n);
  PowCache pows{&c.P, {}};
  const std::size_t s = st.s;
  std::size_t cells = 1;
  for (int j = 0; j < i; ++j) cells *= s;
  Rational total = 0;
  std::vector<std::size_t> x(static_cast<std::size_t>(i));
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t rest = cell;
    for (int j = i - 1; j >= 0; --j) {
      x[static_cast<std::size_t>(j)] = rest % s;
      rest /= s;
    }
    Rational w = c.pi[x[0]];
    for (int j = 0; j + 1 < i; ++j) {
      if (w == 0) break;
      const auto gap = static_cast<std::uint64_t>(st.times[static_cast<std::size_t>(j + 1)] -
                                                  st.times[static_cast<std::size_t>(j)]);
      w *= pows.at(gap)[x[static_cast<std::size_t>(j)]][x[static_cast<std::size_t>(j + 1)]];
    }
    if (w != 0) total += w * (*st.comp)[cell];
  }
  return total;
}

Rational mixingale_norm2(const FiniteMarkovChain& c, const observables::Decomposition& decomp,
                         const schedules::Schedule& sched, int i, std::uint64_t m,
                         std::uint64_t n) {
  auto st = component_setup(c, decomp, sched, i, n);
  if (m > n) return 0;  // trivial sigma-algebra, centered variable
  const std::int64_t t0 = sched.q[static_cast<std::size_t>(i - 1)].eval(
      static_cast<std::int64_t>(n) - static_cast<std::int64_t>(m));
  if (t0 < 0) return 0;  // conditioning precedes the start of the chain

  const std::size_t s = st.s;
  const Rational EF = centering_value(c, decomp, sched, i, n);
  PowCache pows{&c.P, {}};

  int o = 0;  // observed coordinates: scheduled times <= t0
  while (o < i && st.times[static_cast<std::size_t>(o)] <= t0) ++o;

  // h[s0 * s^o + prefix] = E(comp_i(tuple) | prefix digits, state s0 at t0)
  std::size_t pcells = 1;
  for (int j = 0; j < o; ++j) pcells *= s;
  std::size_t ucells = 1;
  for (int j = o; j < i; ++j) ucells *= s;
  std::vector<Rational> h(s * pcells, Rational(0));
  std::vector<std::size_t> x(static_cast<std::size_t>(i));
  for (std::size_t pc = 0; pc < pcells; ++pc) {
    std::size_t rest = pc;
    for (int j = o - 1; j >= 0; --j) {
      x[static_cast<std::size_t>(j)] = rest % s;
      rest /= s;
    }
    for (std::size_t s0 = 0; s0 < s; ++s0) {
      Rational acc = 0;
      for (std::size_t uc = 0; uc < ucells; ++uc) {
        std::size_t urest = uc;
        for (int j = i - 1; j >= o; --j) {
          x[static_cast<std::size_t>(j)] = urest % s;
          urest /= s;
        }
        Rational w = 1;
        for (int j = o; j < i; ++j) {
          const std::int64_t from_t = j == o ? t0 : st.times[static_cast<std::size_t>(j - 1)];
          const std::size_t from_state = j == o ? s0 : x[static_cast<std::size_t>(j - 1)];
          const auto gap =
              static_cast<std::uint64_t>(st.times[static_cast<std::size_t>(j)] - from_t);
          w *= pows.at(gap)[from_state][x[static_cast<std::size_t>(j)]];
          if (w == 0) break;
        }
        if (w == 0) continue;
        // comp index over the full tuple
        std::size_t cell = 0;
        for (int j = 0; j < i; ++j) cell = cell * s + x[static_cast<std::size_t>(j)];
        acc += w * (*st.comp)[cell];
      }
      h[s0 * pcells + pc] = acc - EF;
    }
  }

  // weight each (prefix, s0) by the stationary path law and square
  Rational norm2 = 0;
  for (std::size_t pc = 0; pc < pcells; ++pc) {
    std::size_t rest = pc;
    for (int j = o - 1; j >= 0; --j) {
      x[static_cast<std::size_t>(j)] = rest % s;
      rest /= s;
    }
    Rational wpath = 1;
    if (o > 0) {
      wpath = c.pi[x[0]];
      for (int j = 0; j + 1 < o; ++j) {
        const auto gap = static_cast<std::uint64_t>(st.times[static_cast<std::size_t>(j + 1)] -
                                                    st.times[static_cast<std::size_t>(j)]);
        wpath *= pows.at(gap)[x[static_cast<std::size_t>(j)]][x[static_cast<std::size_t>(j + 1)]];
        if (wpath == 0) break;
      }
    }
    if (wpath == 0) continue;
    for (std::size_t s0 = 0; s0 < s; ++s0) {
      Rational w = wpath;
      if (o > 0) {
        const auto gap =
            static_cast<std::uint64_t>(t0 - st.times[static_cast<std::size_t>(o - 1)]);
        w *= pows.at(gap)[x[static_cast<std::size_t>(o - 1)]][s0];
      } else {
        w = c.pi[s0];
      }
      if (w == 0) continue;
      const Rational& hv = h[s0 * pcells + pc];
      norm2 += w * hv * hv;
    }
  }
  return norm2;
}

namespace {

DecayTable fit_decay(std::vector<std::uint64_t> grid, std::vector<Rational> exact,
                     std::vector<double> value) {
  DecayTable t;
  t.grid = std::move(grid);
  t.exact = std::move(exact);
  t.value = std::move(value);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.grid.size(); ++k)
    if (t.value[k] > 0) {
      xs.push_back(static_cast<double>(t.grid[k]));
      ys.push_back(std::log(t.value[k]));
    }
  t.all_zero = xs.empty();
  if (xs.size() >= 2) t.fit = linear_fit(xs, ys);
  return t;
}

}  // namespace

DecayTable mixingale_decay(const FiniteMarkovChain& c, const observables::Decomposition& decomp,
                           const schedules::Schedule& sched, int i,
                           std::span<const std::uint64_t> m_grid, std::uint64_t n) {
  std::vector<std::uint64_t> grid(m_grid.begin(), m_grid.end());
  std::vector<Rational> exact;
  std::vector<double> value;
  for (auto m : grid) {
    exact.push_back(mixingale_norm2(c, decomp, sched, i, m, n));
    value.push_back(std::sqrt(to_double(exact.back())));
  }
  return fit_decay(std::move(grid), std::move(exact), std::move(value));
}

DecayTable centering_decay(const FiniteMarkovChain& c, const observables::Decomposition& decomp,
                           const schedules::Schedule& sched, int i,
                           std::span<const std::uint64_t> n_grid) {
  std::vector<std::uint64_t> grid(n_grid.begin(), n_grid.end());
  std::vector<Rational> exact;
  std::vector<double> value;
  for (auto n : grid) {
    exact.push_back(rabs(centering_value(c, decomp, sched, i, n)));
    value.push_back(to_double(exact.back()));
  }
  return fit_decay(std::move(grid), std::move(exact), std::move(value));
}

AssumptionReport assumption_report(const FiniteMarkovChain& c, double p, double q,
                                   std::uint64_t n_max, double delta) {
  AssumptionReport rep;
  rep.p = p;
  rep.q = q;
  rep.coefficients = mixing_report(c, n_max);
  const auto& r1 = rep.coefficients.rows.front();
  rep.varpi_bounds = interpolation_bounds(r1.alpha_d, r1.rho, r1.phi_d, r1.psi_d, p, q);
  rep.subscript_note =
      "the interpolated coefficient circulates with its subscripts in both orders; "
      "both labels name the same quantity, computed once for 1 <= p <= q";
  rep.beta_statement =
      "beta_q(n) = 0 for every n: each observation is exactly measurable with respect to "
      "its time-window sigma-algebra, so the approximation error beta measures vanishes "
      "identically and is stated rather than estimated";
  const auto& rows = rep.coefficients.rows;
  rep.psi_size = size_minus_half(
      [&rows](std::uint64_t n) {
        return n <= rows.size() ? rows[static_cast<std::size_t>(n - 1)].psi_d
                                : rows.back().psi_d;
      },
      std::max<std::uint64_t>(16, rows.size()), delta);
  return rep;
}

}  // namespace freqdim::mixing
