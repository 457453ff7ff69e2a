#include "freqdim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "freqdim/errors.hpp"

namespace freqdim::measures {

namespace {

std::vector<double> cdf_from(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    c[i] = acc;
  }
  if (!c.empty()) c.back() = 1.0;  // guard against rounding at the top
  return c;
}

Digit sample_cdf(const std::vector<double>& cdf, double u, Digit first) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return first + static_cast<Digit>(it - cdf.begin());
}

// pattern reachability: rows as bitmasks, s <= 64
std::vector<std::uint64_t> pattern_of(const std::vector<std::vector<Rational>>& M) {
  const std::size_t s = M.size();
  std::vector<std::uint64_t> b(s, 0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j)
      if (M[i][j] > 0) b[i] |= (1ull << j);
  return b;
}

std::vector<std::uint64_t> bool_mul(const std::vector<std::uint64_t>& a,
                                    const std::vector<std::uint64_t>& b) {
  const std::size_t s = a.size();
  std::vector<std::uint64_t> c(s, 0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j)
      if (a[i] & (1ull << j)) c[i] |= b[j];
  return c;
}

bool all_positive(const std::vector<std::uint64_t>& b) {
  const std::uint64_t full =
      b.size() == 64 ? ~0ull : ((1ull << b.size()) - 1);
  for (auto r : b)
    if ((r & full) != full) return false;
  return true;
}

// some power strictly positive; checked up to the Wielandt bound (s-1)^2 + 1
bool is_primitive(const std::vector<std::vector<Rational>>& M) {
  const std::size_t s = M.size();
  auto base = pattern_of(M);
  auto p = base;
  const std::size_t bound = (s - 1) * (s - 1) + 1;
  for (std::size_t k = 1; k <= bound; ++k) {
    if (all_positive(p)) return true;
    p = bool_mul(p, base);
  }
  return all_positive(p);
}

bool is_irreducible(const std::vector<std::vector<Rational>>& M) {
  const std::size_t s = M.size();
  auto base = pattern_of(M);
  auto closure = base;
  for (std::size_t k = 1; k < s; ++k) {
    auto next = bool_mul(closure, base);
    for (std::size_t i = 0; i < s; ++i) closure[i] |= next[i] | (1ull << i);
  }
  return all_positive(closure);
}

// exact solve A x = b by Gaussian elimination (A modified in place)
std::vector<Rational> solve_exact(std::vector<std::vector<Rational>> A, std::vector<Rational> b) {
  const std::size_t s = A.size();
  for (std::size_t col = 0; col < s; ++col) {
    std::size_t piv = col;
    while (piv < s && A[piv][col] == 0) ++piv;
    if (piv == s) throw ValidationError("singular system while solving for stationary vector");
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < s; ++r) {
      if (r == col || A[r][col] == 0) continue;
      const Rational f = A[r][col] / A[col][col];
      for (std::size_t c2 = col; c2 < s; ++c2) A[r][c2] -= f * A[col][c2];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rational> x(s);
  for (std::size_t i = 0; i < s; ++i) x[i] = b[i] / A[i][i];
  return x;
}

std::vector<double> to_doubles(const std::vector<Rational>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
  return out;
}

}  // namespace

BernoulliLaw BernoulliLaw::from_weights(std::vector<Rational> w, Digit first) {
  if (w.size() < 1) throw ValidationError("empty weight vector");
  Rational sum = 0;
  for (const auto& x : w) {
    if (x < 0) throw ValidationError("negative weight");
    sum += x;
  }
  if (sum != 1) throw ValidationError("weights sum to " + format_rational(sum) + ", expected 1");
  BernoulliLaw law;
  law.alpha = Alphabet::finite_from(first, static_cast<Digit>(w.size()));
  law.wd = to_doubles(w);
  law.w = std::move(w);
  law.cdf = cdf_from(law.wd);
  law.exact = true;
  return law;
}

BernoulliLaw BernoulliLaw::from_doubles(std::vector<double> w, Digit first) {
  if (w.size() < 1) throw ValidationError("empty weight vector");
  double sum = 0;
  for (double x : w) {
    if (x < 0) throw ValidationError("negative weight");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError("weights sum to " + std::to_string(sum) + ", expected 1 within 1e-12");
  BernoulliLaw law;
  law.alpha = Alphabet::finite_from(first, static_cast<Digit>(w.size()));
  law.wd = std::move(w);
  law.cdf = cdf_from(law.wd);
  law.exact = false;
  return law;
}

Digit BernoulliLaw::sample(double u) const { return sample_cdf(cdf, u, alpha.first); }

double BernoulliLaw::weight_d(Digit d) const {
  if (!alpha.contains(d)) throw ValidationError("digit outside alphabet");
  return wd[static_cast<std::size_t>(d - alpha.first)];
}

const Rational& BernoulliLaw::weight(Digit d) const {
  if (!exact) throw ValidationError("law has no exact weights");
  if (!alpha.contains(d)) throw ValidationError("digit outside alphabet");
  return w[static_cast<std::size_t>(d - alpha.first)];
}

MarkovLaw MarkovLaw::from_joint(std::vector<std::vector<Rational>> R) {
  const std::size_t m = R.size();
  if (m < 2 || m > 64) throw ValidationError("joint matrix must be square with 2..64 states");
  for (const auto& row : R)
    if (row.size() != m) throw ValidationError("joint matrix must be square");
  Rational total = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (R[i][j] < 0)
        throw ValidationError("negative entry at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      total += R[i][j];
    }
  if (total != 1)
    throw ValidationError("joint weights sum to " + format_rational(total) + ", expected 1");
  // pair-frequency consistency: row marginal must equal column marginal
  std::vector<Rational> row(m, 0), col(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      row[i] += R[i][j];
      col[j] += R[i][j];
    }
  for (std::size_t i = 0; i < m; ++i)
    if (row[i] != col[i])
      throw ValidationError(
          "marginal mismatch at state " + std::to_string(i) + " (row " +
          format_rational(row[i]) + " vs column " + format_rational(col[i]) +
          "): the pair frequencies are inconsistent and no point realizes them");
  if (!is_primitive(R))
    throw ValidationError("joint matrix is not primitive: no power is strictly positive");
  MarkovLaw law;
  law.m = static_cast<Digit>(m);
  law.q = row;
  law.Q.assign(m, std::vector<Rational>(m));
  for (std::size_t i = 0; i < m; ++i) {
    // primitivity forbids zero rows, so q[i] > 0 here
    for (std::size_t j = 0; j < m; ++j) law.Q[i][j] = R[i][j] / row[i];
  }
  // stationarity of q under Q is forced by the marginal identity; keep the check cheap
  for (std::size_t j = 0; j < m; ++j) {
    Rational acc = 0;
    for (std::size_t i = 0; i < m; ++i) acc += law.q[i] * law.Q[i][j];
    if (acc != law.q[j]) throw ValidationError("internal: marginal not stationary");
  }
  law.R = std::move(R);
  law.qcdf = cdf_from(to_doubles(law.q));
  law.Qcdf.resize(m);
  for (std::size_t i = 0; i < m; ++i) law.Qcdf[i] = cdf_from(to_doubles(law.Q[i]));
  return law;
}

double GaussMarginalLaw::weight(Digit j) const {
  if (j < 1) throw ValidationError("continued-fraction digit must be >= 1");
  const double x = static_cast<double>(j);
  return std::log2(1.0 + 1.0 / (x * (x + 2.0)));
}

double GaussMarginalLaw::cdf(Digit j) const {
  if (j < 1) return 0.0;
  const double x = static_cast<double>(j);
  // the partial sums telescope: sum_{k<=j} log2(1+1/(k(k+2))) = 1 - log2(1+1/(j+1))
  return 1.0 - std::log2(1.0 + 1.0 / (x + 1.0));
}

Digit GaussMarginalLaw::sample(double u) const {
  const double t = std::exp2(1.0 - u) - 1.0;  // in (0,1]
  Digit j = std::max<Digit>(1, static_cast<Digit>(std::ceil(1.0 / t - 1.0)));
  while (cdf(j) < u) ++j;
  while (j > 1 && cdf(j - 1) >= u) --j;
  return j;
}

FiniteMarkovChain FiniteMarkovChain::from_transition(std::vector<std::vector<Rational>> P,
                                                     std::vector<Digit> obs) {
  const std::size_t s = P.size();
  if (s < 1 || s > 64) throw ValidationError("transition matrix must have 1..64 states");
  for (const auto& row : P) {
    if (row.size() != s) throw ValidationError("transition matrix must be square");
    Rational sum = 0;
    for (const auto& x : row) {
      if (x < 0) throw ValidationError("negative transition probability");
      sum += x;
    }
    if (sum != 1) throw ValidationError("transition row sums to " + format_rational(sum));
  }
  if (s > 1 && !is_irreducible(P))
    throw ValidationError("chain is not irreducible: stationary law not unique");
  FiniteMarkovChain c;
  c.s = static_cast<int>(s);
  c.primitive = is_primitive(P);
  if (obs.empty()) {
    obs.resize(s);
    for (std::size_t i = 0; i < s; ++i) obs[i] = static_cast<Digit>(i);
  }
  if (obs.size() != s) throw ValidationError("observation map size must match state count");
  Digit maxsym = 0;
  for (Digit o : obs) {
    if (o < 0) throw ValidationError("observation symbols must be >= 0");
    maxsym = std::max(maxsym, o);
  }
  c.obs = std::move(obs);
  c.obs_alpha = Alphabet::base(maxsym + 1);
  // stationary vector: (P^T - I) pi = 0 with the last equation replaced by sum = 1
  std::vector<std::vector<Rational>> A(s, std::vector<Rational>(s));
  std::vector<Rational> b(s, 0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) A[i][j] = P[j][i] - Rational(i == j ? 1 : 0);
  for (std::size_t j = 0; j < s; ++j) A[s - 1][j] = 1;
  b[s - 1] = 1;
  c.pi = solve_exact(std::move(A), std::move(b));
  for (const auto& x : c.pi)
    if (x < 0) throw ValidationError("internal: negative stationary weight");
  c.picdf = cdf_from(to_doubles(c.pi));
  c.Pcdf.resize(s);
  for (std::size_t i = 0; i < s; ++i) c.Pcdf[i] = cdf_from(to_doubles(P[i]));
  c.P = std::move(P);
  return c;
}

Alphabet law_alphabet(const Law& law) {
  return std::visit(
      [](const auto& l) -> Alphabet {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, BernoulliLaw>) return l.alpha;
        if constexpr (std::is_same_v<T, MarkovLaw>) return Alphabet::base(l.m);
        if constexpr (std::is_same_v<T, GaussMarginalLaw>) return Alphabet::positive_integers();
        if constexpr (std::is_same_v<T, FiniteMarkovChain>) return l.obs_alpha;
      },
      law);
}

DigitStream sample_stream(const Law& law, RngKey key, std::uint64_t sequential_cap) {
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) {
    BernoulliLaw l = *b;
    return DigitStream::pure_generator(
        l.alpha, [l, key](std::uint64_t i) { return l.sample(uniform01(key, i)); });
  }
  if (const auto* g = std::get_if<GaussMarginalLaw>(&law)) {
    GaussMarginalLaw l = *g;
    return DigitStream::pure_generator(
        Alphabet::positive_integers(),
        [l, key](std::uint64_t i) { return l.sample(uniform01(key, i)); });
  }
  if (const auto* mk = std::get_if<MarkovLaw>(&law)) {
    MarkovLaw l = *mk;
    auto next = [l, key, state = Digit(-1), idx = std::uint64_t(0)]() mutable {
      const double u = uniform01(key, idx++);
      state = (state < 0) ? sample_cdf(l.qcdf, u, 0)
                          : sample_cdf(l.Qcdf[static_cast<std::size_t>(state)], u, 0);
      return state;
    };
    return DigitStream::sequential_generator(Alphabet::base(l.m), next, sequential_cap);
  }
  const auto& c = std::get<FiniteMarkovChain>(law);
  FiniteMarkovChain l = c;
  auto next = [l, key, state = Digit(-1), idx = std::uint64_t(0)]() mutable {
    const double u = uniform01(key, idx++);
    state = (state < 0) ? sample_cdf(l.picdf, u, 0)
                        : sample_cdf(l.Pcdf[static_cast<std::size_t>(state)], u, 0);
    return l.obs[static_cast<std::size_t>(state)];
  };
  return DigitStream::sequential_generator(l.obs_alpha, next, sequential_cap);
}

MassResult cylinder_mass(const Law& law, std::span<const Digit> word) {
  MassResult out;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) {
    out.exact = b->exact;
    // numerator and denominator accumulate separately; one gcd at the end
    // instead of one per digit, which matters for 1e5-digit words
    BigInt num = 1, den = 1;
    double lm = 0;
    for (Digit d : word) {
      const double w = b->weight_d(d);
      if (w == 0.0 || (b->exact && b->weight(d) == 0)) {
        out.zero = true;
        out.mass = 0;
        out.log_mass = kNegInf;
        return out;
      }
      lm += std::log(w);
      if (b->exact) {
        num *= numerator(b->weight(d));
        den *= denominator(b->weight(d));
      }
    }
    out.mass = b->exact ? Rational(num, den) : Rational(0);
    out.log_mass = b->exact && !word.empty() ? ln_bigint(num) - ln_bigint(den) : lm;
    return out;
  }
  if (const auto* g = std::get_if<GaussMarginalLaw>(&law)) {
    out.exact = false;
    double lm = 0;
    for (Digit d : word) lm += std::log(g->weight(d));
    out.log_mass = lm;
    return out;
  }
  if (const auto* mk = std::get_if<MarkovLaw>(&law)) {
    out.exact = true;
    if (word.empty()) {
      out.mass = 1;
      out.log_mass = 0;
      return out;
    }
    for (Digit d : word)
      if (d < 0 || d >= mk->m) throw ValidationError("digit outside alphabet");
    BigInt num = 1, den = 1;
    auto absorb = [&](const Rational& w) {
      if (w == 0) return false;
      num *= numerator(w);
      den *= denominator(w);
      return true;
    };
    bool alive = absorb(mk->q[static_cast<std::size_t>(word[0])]);
    for (std::size_t t = 1; alive && t < word.size(); ++t)
      alive = absorb(
          mk->Q[static_cast<std::size_t>(word[t - 1])][static_cast<std::size_t>(word[t])]);
    if (!alive) {
      out.mass = 0;
      out.zero = true;
      out.log_mass = kNegInf;
    } else {
      out.mass = Rational(num, den);
      out.log_mass = ln_bigint(num) - ln_bigint(den);
    }
    return out;
  }
  const auto& c = std::get<FiniteMarkovChain>(law);
  out.exact = true;
  if (word.empty()) {
    out.mass = 1;
    out.log_mass = 0;
    return out;
  }
  // sum over hidden paths compatible with the observed word
  std::vector<Rational> v(static_cast<std::size_t>(c.s), 0);
  for (std::size_t s0 = 0; s0 < v.size(); ++s0)
    if (c.obs[s0] == word[0]) v[s0] = c.pi[s0];
  for (std::size_t t = 1; t < word.size(); ++t) {
    std::vector<Rational> nv(v.size(), 0);
    for (std::size_t a = 0; a < v.size(); ++a) {
      if (v[a] == 0) continue;
      for (std::size_t bst = 0; bst < v.size(); ++bst)
        if (c.obs[bst] == word[t]) nv[bst] += v[a] * c.P[a][bst];
    }
    v = std::move(nv);
  }
  Rational mass = 0;
  for (const auto& x : v) mass += x;
  out.mass = mass;
  if (mass == 0) {
    out.zero = true;
    out.log_mass = kNegInf;
  } else {
    out.log_mass = ln_rational(mass);
  }
  return out;
}

std::optional<FiniteMarginal> finite_marginal(const Law& law) {
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) {
    FiniteMarginal m;
    m.alpha = b->alpha;
    m.exact = b->exact;
    m.wd = b->wd;
    if (b->exact) m.w = b->w;
    return m;
  }
  if (const auto* mk = std::get_if<MarkovLaw>(&law)) {
    FiniteMarginal m;
    m.alpha = Alphabet::base(mk->m);
    m.exact = true;
    m.w = mk->q;
    m.wd.resize(m.w.size());
    for (std::size_t i = 0; i < m.w.size(); ++i) m.wd[i] = to_double(m.w[i]);
    return m;
  }
  if (const auto* c = std::get_if<FiniteMarkovChain>(&law)) {
    FiniteMarginal m;
    m.alpha = c->obs_alpha;
    m.exact = true;
    m.w.assign(static_cast<std::size_t>(c->obs_alpha.size), 0);
    for (std::size_t s0 = 0; s0 < c->obs.size(); ++s0)
      m.w[static_cast<std::size_t>(c->obs[s0])] += c->pi[s0];
    m.wd.resize(m.w.size());
    for (std::size_t i = 0; i < m.w.size(); ++i) m.wd[i] = to_double(m.w[i]);
    return m;
  }
  return std::nullopt;
}

DigitWeightSeq DigitWeightSeq::finite(std::vector<Rational> prefix) {
  DigitWeightSeq s;
  s.kind = Kind::Finite;
  Rational sum = 0;
  for (const auto& x : prefix) {
    if (x < 0) throw ValidationError("negative weight");
    sum += x;
  }
  if (sum != 1)
    throw ValidationError("weight prefix sums to " + format_rational(sum) + ", expected 1");
  s.prefix_d.resize(prefix.size());
  for (std::size_t i = 0; i < prefix.size(); ++i) s.prefix_d[i] = to_double(prefix[i]);
  s.prefix = std::move(prefix);
  s.psums.resize(s.prefix_d.size());
  double acc = 0;
  for (std::size_t i = 0; i < s.prefix_d.size(); ++i) {
    acc += s.prefix_d[i];
    s.psums[i] = acc;
  }
  return s;
}

DigitWeightSeq DigitWeightSeq::gauss() {
  DigitWeightSeq s;
  s.kind = Kind::Gauss;
  return s;
}

double DigitWeightSeq::weight_d(Digit j) const {
  if (j < 1) throw ValidationError("continued-fraction digit must be >= 1");
  if (kind == Kind::Gauss) return GaussMarginalLaw{}.weight(j);
  return j <= static_cast<Digit>(prefix_d.size()) ? prefix_d[static_cast<std::size_t>(j - 1)]
                                                  : 0.0;
}

Rational DigitWeightSeq::weight(Digit j) const {
  if (kind != Kind::Finite) throw ValidationError("weight sequence has no exact weights");
  if (j < 1) throw ValidationError("continued-fraction digit must be >= 1");
  return j <= static_cast<Digit>(prefix.size()) ? prefix[static_cast<std::size_t>(j - 1)]
                                                : Rational(0);
}

double DigitWeightSeq::prefix_sum_d(Digit n) const {
  if (n < 1) return 0.0;
  if (kind == Kind::Gauss) return GaussMarginalLaw{}.cdf(n);
  return n <= static_cast<Digit>(psums.size()) ? psums[static_cast<std::size_t>(n - 1)]
                                               : psums.back();
}

Rational DigitWeightSeq::prefix_sum(Digit n) const {
  if (kind != Kind::Finite) throw ValidationError("weight sequence has no exact weights");
  Rational acc = 0;
  const Digit k = std::min<Digit>(n, static_cast<Digit>(prefix.size()));
  for (Digit j = 1; j <= k; ++j) acc += prefix[static_cast<std::size_t>(j - 1)];
  return acc;
}

BernoulliLaw truncated_bernoulli(const DigitWeightSeq& rbar, Digit n) {
  if (n < 1) throw ValidationError("truncation index must be >= 1");
  if (n > 1'000'000) throw ResourceCapError("truncated law support exceeds cap of 1000000");
  if (rbar.exact()) {
    const Rational n3 = Rational(1, BigInt(n) * n * n);
    const Rational denom = rbar.prefix_sum(n) + Rational(1, BigInt(n) * n);
    std::vector<Rational> w(static_cast<std::size_t>(n));
    for (Digit k = 1; k <= n; ++k)
      w[static_cast<std::size_t>(k - 1)] = (rbar.weight(k) + n3) / denom;
    return BernoulliLaw::from_weights(std::move(w), 1);
  }
  const double nn = static_cast<double>(n);
  const double n3 = 1.0 / (nn * nn * nn);
  const double denom = rbar.prefix_sum_d(n) + 1.0 / (nn * nn);
  std::vector<double> w(static_cast<std::size_t>(n));
  double acc = 0;
  for (Digit k = 1; k < n; ++k) {
    w[static_cast<std::size_t>(k - 1)] = (rbar.weight_d(k) + n3) / denom;
    acc += w[static_cast<std::size_t>(k - 1)];
  }
  w[static_cast<std::size_t>(n - 1)] = 1.0 - acc;  // exact unit mass in doubles
  return BernoulliLaw::from_doubles(std::move(w), 1);
}

DigitStream truncated_cf_stream(const DigitWeightSeq& rbar, RngKey key) {
  DigitWeightSeq r = rbar;
  auto digit_at = [r, key](std::uint64_t i) -> Digit {
    const Digit n = static_cast<Digit>(i) + 1;
    const double nn = static_cast<double>(n);
    const double u = uniform01(key, i);
    const double rhs = u * (r.prefix_sum_d(n) + 1.0 / (nn * nn));
    const double n3 = 1.0 / (nn * nn * nn);
    Digit lo = 1, hi = n;
    while (lo < hi) {
      const Digit mid = lo + (hi - lo) / 2;
      if (r.prefix_sum_d(mid) + static_cast<double>(mid) * n3 >= rhs)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  };
  return DigitStream::pure_generator(Alphabet::positive_integers(), digit_at);
}

DigitStream iid_cf_stream(const DigitWeightSeq& rbar, RngKey key) {
  if (rbar.kind == DigitWeightSeq::Kind::Gauss)
    return sample_stream(Law(GaussMarginalLaw{}), key);
  return sample_stream(Law(BernoulliLaw::from_weights(rbar.prefix, 1)), key);
}

}  // namespace freqdim::measures
