#include "freqdim/observables.hpp"

#include <cmath>
#include <variant>

#include "freqdim/errors.hpp"

namespace freqdim::observables {

namespace {

std::size_t checked_pow(std::size_t base, int e, std::size_t cap) {
  std::size_t acc = 1;
  for (int i = 0; i < e; ++i) {
    if (acc > cap / base)
      throw ResourceCapError("tuple table exceeds cap of " + std::to_string(cap) + " entries");
    acc *= base;
  }
  return acc;
}

std::size_t flat_index(const Alphabet& a, std::span<const Digit> x) {
  std::size_t idx = 0;
  for (Digit d : x) {
    if (!a.contains(d)) throw ValidationError("digit outside observable alphabet");
    idx = idx * static_cast<std::size_t>(a.size) + static_cast<std::size_t>(d - a.first);
  }
  return idx;
}

}  // namespace

Observable Observable::indicator_product(Alphabet a, std::vector<Digit> word) {
  if (word.empty()) throw ValidationError("indicator word must be nonempty");
  for (Digit d : word)
    if (!a.contains(d)) throw ValidationError("indicator word digit outside alphabet");
  Observable f;
  f.kind_ = Kind::IndicatorProduct;
  f.arity_ = static_cast<int>(word.size());
  f.alpha_ = a;
  f.word_ = std::move(word);
  f.holder_.bound = 1.0;
  return f;
}

Observable Observable::table(Alphabet a, int arity, std::vector<Rational> values) {
  if (!a.finite) throw ValidationError("table observables need a finite alphabet");
  if (arity < 1) throw ValidationError("observable arity must be >= 1");
  const std::size_t want = checked_pow(static_cast<std::size_t>(a.size), arity, 10'000'000);
  if (values.size() != want)
    throw ValidationError("table has " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(want));
  Observable f;
  f.kind_ = Kind::Table;
  f.arity_ = arity;
  f.alpha_ = a;
  f.table_d_.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) f.table_d_[i] = to_double(values[i]);
  f.table_ = std::move(values);
  f.holder_.bound = f.sup_abs();
  return f;
}

Rational Observable::eval_exact(std::span<const Digit> x) const {
  if (static_cast<int>(x.size()) < arity_)
    throw ValidationError("tuple shorter than observable arity");
  if (kind_ == Kind::IndicatorProduct) {
    for (int i = 0; i < arity_; ++i)
      if (x[static_cast<std::size_t>(i)] != word_[static_cast<std::size_t>(i)]) return 0;
    return 1;
  }
  return table_[flat_index(alpha_, x.subspan(0, static_cast<std::size_t>(arity_)))];
}

double Observable::eval(std::span<const Digit> x) const {
  if (static_cast<int>(x.size()) < arity_)
    throw ValidationError("tuple shorter than observable arity");
  if (kind_ == Kind::IndicatorProduct) {
    for (int i = 0; i < arity_; ++i)
      if (x[static_cast<std::size_t>(i)] != word_[static_cast<std::size_t>(i)]) return 0.0;
    return 1.0;
  }
  return table_d_[flat_index(alpha_, x.subspan(0, static_cast<std::size_t>(arity_)))];
}

double Observable::sup_abs() const {
  if (kind_ == Kind::IndicatorProduct) return 1.0;
  double m = 0;
  for (double v : table_d_) m = std::max(m, std::abs(v));
  return m;
}

MeanResult mean_exact(const Observable& F, const measures::FiniteMarginal& mu,
                      std::uint64_t tuple_cap) {
  MeanResult out;
  out.exact = mu.exact;
  if (F.kind() == Observable::Kind::IndicatorProduct) {
    Rational acc = 1;
    double accd = 1;
    for (Digit d : F.word()) {
      if (!mu.alpha.contains(d)) {
        acc = 0;
        accd = 0;
        break;
      }
      const std::size_t j = static_cast<std::size_t>(d - mu.alpha.first);
      accd *= mu.wd[j];
      if (mu.exact) acc *= mu.w[j];
    }
    out.value = mu.exact ? acc : Rational(0);
    out.value_d = mu.exact ? to_double(acc) : accd;
    return out;
  }
  if (F.alphabet() != mu.alpha)
    throw ValidationError("observable and marginal alphabets differ");
  const std::size_t m = static_cast<std::size_t>(mu.alpha.size);
  const int l = F.arity();
  const std::size_t tuples = checked_pow(m, l, tuple_cap);
  Rational acc = 0;
  double accd = 0;
  std::vector<std::size_t> dig(static_cast<std::size_t>(l), 0);
  for (std::size_t t = 0; t < tuples; ++t) {
    std::size_t rest = t;
    for (int i = l - 1; i >= 0; --i) {
      dig[static_cast<std::size_t>(i)] = rest % m;
      rest /= m;
    }
    double wprod = 1;
    for (int i = 0; i < l; ++i) wprod *= mu.wd[dig[static_cast<std::size_t>(i)]];
    accd += wprod * to_double(F.values()[t]);
    if (mu.exact) {
      Rational wr = 1;
      for (int i = 0; i < l; ++i) wr *= mu.w[dig[static_cast<std::size_t>(i)]];
      acc += wr * F.values()[t];
    }
  }
  out.value = acc;
  out.value_d = mu.exact ? to_double(acc) : accd;
  return out;
}

double mean_indicator(const Observable& F, const std::function<double(Digit)>& weight) {
  if (F.kind() != Observable::Kind::IndicatorProduct)
    throw ValidationError("closed-form mean needs an indicator observable");
  double acc = 1;
  for (Digit d : F.word()) acc *= weight(d);
  return acc;
}

MeanResult mean_monte_carlo(const Observable& F, const measures::Law& mu, RngKey key,
                            std::uint64_t samples) {
  if (samples < 2) throw ValidationError("need at least 2 samples");
  const int l = F.arity();
  // iid tuples from the one-dimensional marginal
  auto marg = finite_marginal(mu);
  const auto* gauss = std::get_if<measures::GaussMarginalLaw>(&mu);
  if (!marg && !gauss) throw ValidationError("no marginal sampler for this law");
  std::vector<double> cdf;
  if (marg) {
    double a = 0;
    for (double w : marg->wd) cdf.push_back(a += w);
    if (!cdf.empty()) cdf.back() = 1.0;
  }
  std::vector<Digit> x(static_cast<std::size_t>(l), 0);
  double sum = 0, sumsq = 0;
  for (std::uint64_t k = 0; k < samples; ++k) {
    for (int j = 0; j < l; ++j) {
      const double u = uniform01(key, k * static_cast<std::uint64_t>(l) + static_cast<std::uint64_t>(j));
      if (marg) {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        x[static_cast<std::size_t>(j)] = marg->alpha.first + static_cast<Digit>(it - cdf.begin());
      } else {
        x[static_cast<std::size_t>(j)] = gauss->sample(u);
      }
    }
    const double v = F.eval(x);
    sum += v;
    sumsq += v * v;
  }
  MeanResult out;
  out.exact = false;
  const double n = static_cast<double>(samples);
  out.value_d = sum / n;
  const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
  out.stderr_est = std::sqrt(var / n);
  out.samples = samples;
  return out;
}

const Rational& Decomposition::component_exact(int i, std::span<const Digit> prefix) const {
  if (i < 1 || i > arity) throw ValidationError("component index out of range");
  if (!exact) throw ValidationError("decomposition is not exact");
  return comp[static_cast<std::size_t>(i - 1)][flat_index(
      alpha, prefix.subspan(0, static_cast<std::size_t>(i)))];
}

double Decomposition::component(int i, std::span<const Digit> prefix) const {
  if (i < 1 || i > arity) throw ValidationError("component index out of range");
  return comp_d[static_cast<std::size_t>(i - 1)][flat_index(
      alpha, prefix.subspan(0, static_cast<std::size_t>(i)))];
}

Decomposition decompose(const Observable& F, const measures::FiniteMarginal& mu) {
  if (!mu.alpha.finite) throw ValidationError("decomposition needs a finite alphabet");
  if (!mu.exact)
    throw ValidationError("decomposition needs exact marginal weights");
  const std::size_t m = static_cast<std::size_t>(mu.alpha.size);
  const int l = F.arity();
  const std::size_t top = checked_pow(m, l, 10'000'000);

  // dense rational table of F
  std::vector<Rational> G(top);
  if (F.kind() == Observable::Kind::Table) {
    if (F.alphabet() != mu.alpha)
      throw ValidationError("observable and marginal alphabets differ");
    G = F.values();
  } else {
    std::vector<Digit> x(static_cast<std::size_t>(l));
    for (std::size_t t = 0; t < top; ++t) {
      std::size_t rest = t;
      for (int i = l - 1; i >= 0; --i) {
        x[static_cast<std::size_t>(i)] = mu.alpha.first + static_cast<Digit>(rest % m);
        rest /= m;
      }
      G[t] = F.eval_exact(x);
    }
  }

  Decomposition d;
  d.arity = l;
  d.alpha = mu.alpha;
  d.exact = true;
  d.comp.resize(static_cast<std::size_t>(l));
  // average out the last coordinate repeatedly; the difference at each level
  // is the component, so the telescoping reconstruction is exact by shape
  for (int i = l; i >= 1; --i) {
    const std::size_t rows = G.size() / m;
    std::vector<Rational> H(rows, Rational(0));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t y = 0; y < m; ++y) H[r] += mu.w[y] * G[r * m + y];
    auto& ci = d.comp[static_cast<std::size_t>(i - 1)];
    ci.resize(G.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t y = 0; y < m; ++y) ci[r * m + y] = G[r * m + y] - H[r];
    G = std::move(H);
  }
  d.mean = G[0];
  d.mean_d = to_double(d.mean);
  d.comp_d.resize(d.comp.size());
  for (std::size_t i = 0; i < d.comp.size(); ++i) {
    d.comp_d[i].resize(d.comp[i].size());
    for (std::size_t j = 0; j < d.comp[i].size(); ++j) d.comp_d[i][j] = to_double(d.comp[i][j]);
  }
  return d;
}

}  // namespace freqdim::observables
