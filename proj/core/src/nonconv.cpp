#include "freqdim/nonconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "freqdim/errors.hpp"

namespace freqdim::nonconv {

namespace {

void require_admissible(const schedules::Schedule& sched, std::uint64_t N) {
  auto rep = schedules::validate(sched, static_cast<std::int64_t>(N));
  if (!rep.ok)
    throw ValidationError("schedule inadmissible at (i=" + std::to_string(rep.violating_i) +
                          ", n=" + std::to_string(rep.violating_n) + "): " + rep.reason);
}

// Per-n index evaluation. Nonnegative polynomial coefficients take a raw
// int64 Horner (intermediates are monotone in n, so the precheck at N covers
// the whole range); anything else goes through the checked bigint path.
struct IndexEval {
  const schedules::ScheduleFn* fn;
  bool fast = false;

  std::int64_t at(std::int64_t n) const {
    if (!fast) return fn->eval(n);
    std::int64_t acc = 0;
    for (std::size_t k = fn->coeffs.size(); k-- > 0;) acc = acc * n + fn->coeffs[k];
    return acc;
  }
};

std::vector<IndexEval> make_evals(const schedules::Schedule& sched, std::uint64_t N) {
  std::vector<IndexEval> evals;
  for (const auto& fn : sched.q) {
    IndexEval e{&fn, false};
    if (fn.kind == schedules::ScheduleFn::Kind::Poly) {
      bool nonneg = true;
      for (auto c : fn.coeffs) nonneg = nonneg && c >= 0;
      e.fast = nonneg;
    }
    fn.eval(static_cast<std::int64_t>(N));  // throws past 2^62 up front
    evals.push_back(e);
  }
  return evals;
}

// walks n = 1..N handing the digit tuple to `use`
template <typename UseTuple>
void for_each_tuple(const DigitStream& stream, const schedules::Schedule& sched, std::uint64_t N,
                    UseTuple&& use) {
  const int l = sched.arity();
  auto evals = make_evals(sched, N);
  std::vector<Digit> x(static_cast<std::size_t>(l));
  for (std::uint64_t n = 1; n <= N; ++n) {
    for (int i = 0; i < l; ++i)
      x[static_cast<std::size_t>(i)] =
          stream.at(static_cast<std::uint64_t>(evals[static_cast<std::size_t>(i)].at(
              static_cast<std::int64_t>(n))));
    use(n, std::span<const Digit>(x));
  }
}

std::size_t cell_count(const digits::Alphabet& a, int l) {
  std::size_t acc = 1;
  for (int i = 0; i < l; ++i) {
    if (acc > std::size_t{10'000'000} / static_cast<std::size_t>(a.size))
      throw ResourceCapError("tuple cell table exceeds 10000000 entries");
    acc *= static_cast<std::size_t>(a.size);
  }
  return acc;
}

std::size_t cell_of(const digits::Alphabet& a, std::span<const Digit> x) {
  std::size_t idx = 0;
  for (Digit d : x) {
    if (!a.contains(d)) throw ValidationError("stream digit outside the expected alphabet");
    idx = idx * static_cast<std::size_t>(a.size) + static_cast<std::size_t>(d - a.first);
  }
  return idx;
}

std::vector<std::uint64_t> normalize_checkpoints(std::vector<std::uint64_t> cps,
                                                 std::uint64_t N) {
  if (cps.empty()) cps = dyadic_checkpoints(N);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  if (cps.empty() || cps.back() != N) cps.push_back(N);
  for (auto c : cps)
    if (c < 1 || c > N) throw ValidationError("checkpoint outside [1, N]");
  return cps;
}

double mean_of(const observables::Observable& F, const measures::Law& mu, bool& exact,
               Rational& exact_value) {
  auto marg = measures::finite_marginal(mu);
  if (marg) {
    auto m = observables::mean_exact(F, *marg);
    exact = m.exact;
    exact_value = m.value;
    return m.value_d;
  }
  const auto* gauss = std::get_if<measures::GaussMarginalLaw>(&mu);
  if (!gauss) throw ValidationError("no mean rule for this law");
  exact = false;
  return observables::mean_indicator(F, [&](Digit d) { return gauss->weight(d); });
}

}  // namespace

double ConvergenceTrace::final_deviation() const {
  return std::abs(averages.back() - target);
}

std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t N) {
  if (N == 0) throw ValidationError("need N >= 1");
  std::vector<std::uint64_t> cps;
  for (std::uint64_t c = 1024; c < N; c *= 2) cps.push_back(c);
  if (cps.empty() && N >= 2) cps.push_back(N / 2);
  cps.push_back(N);
  return cps;
}

ConvergenceTrace run_slln(const DigitStream& stream, const schedules::Schedule& sched,
                          const observables::Observable& F, const measures::Law& mu,
                          std::uint64_t N, std::vector<std::uint64_t> checkpoints) {
  if (F.arity() != sched.arity())
    throw ValidationError("observable arity does not match the schedule");
  require_admissible(sched, N);
  auto cps = normalize_checkpoints(std::move(checkpoints), N);

  ConvergenceTrace tr;
  tr.checkpoints = cps;
  Rational target_exact_value;
  tr.target = mean_of(F, mu, tr.target_exact, target_exact_value);

  const auto& a = F.alphabet();
  std::size_t next_cp = 0;
  if (a.finite) {
    // count tuple cells; sums materialize only at checkpoints
    const std::size_t cells = cell_count(a, F.arity());
    std::vector<std::uint64_t> cnt(cells, 0);
    std::vector<Digit> cell_digits(static_cast<std::size_t>(F.arity()));
    for_each_tuple(stream, sched, N, [&](std::uint64_t n, std::span<const Digit> x) {
      ++cnt[cell_of(a, x)];
      if (next_cp < cps.size() && n == cps[next_cp]) {
        Rational S = 0;
        for (std::size_t c = 0; c < cells; ++c) {
          if (cnt[c] == 0) continue;
          std::size_t rest = c;
          for (int i = F.arity() - 1; i >= 0; --i) {
            cell_digits[static_cast<std::size_t>(i)] =
                a.first + static_cast<Digit>(rest % static_cast<std::size_t>(a.size));
            rest /= static_cast<std::size_t>(a.size);
          }
          S += Rational(BigInt(cnt[c])) * F.eval_exact(cell_digits);
        }
        tr.averages.push_back(to_double(S / Rational(BigInt(n))));
        ++next_cp;
      }
    });
  } else {
    // infinite alphabet: indicator hits are integers, sum directly
    std::uint64_t S = 0;
    for_each_tuple(stream, sched, N, [&](std::uint64_t n, std::span<const Digit> x) {
      S += F.eval(x) != 0.0 ? 1 : 0;
      if (next_cp < cps.size() && n == cps[next_cp]) {
        tr.averages.push_back(static_cast<double>(S) / static_cast<double>(n));
        ++next_cp;
      }
    });
  }
  return tr;
}

ConvergenceTrace run_components(const DigitStream& stream, const schedules::Schedule& sched,
                                const observables::Decomposition& decomp,
                                const observables::Observable& F, std::uint64_t N,
                                std::vector<std::uint64_t> checkpoints) {
  const int l = decomp.arity;
  if (F.arity() != l || sched.arity() != l)
    throw ValidationError("decomposition, observable and schedule arities disagree");
  if (!decomp.exact) throw ValidationError("component run needs an exact decomposition");
  require_admissible(sched, N);
  auto cps = normalize_checkpoints(std::move(checkpoints), N);

  const auto& a = decomp.alpha;
  if (!a.finite || F.alphabet() != a)
    throw ValidationError("component run needs matching finite alphabets");
  const std::size_t m = static_cast<std::size_t>(a.size);
  const std::size_t cells = cell_count(a, l);

  ConvergenceTrace tr;
  tr.checkpoints = cps;
  tr.target = decomp.mean_d;
  tr.target_exact = true;
  tr.component_averages.resize(static_cast<std::size_t>(l));

  // strides[i] maps a full-tuple cell to its length-(i+1) prefix cell
  std::vector<std::size_t> strides(static_cast<std::size_t>(l), 1);
  for (int i = l - 2; i >= 0; --i)
    strides[static_cast<std::size_t>(i)] = strides[static_cast<std::size_t>(i + 1)] * m;

  std::vector<std::uint64_t> cnt(cells, 0);
  std::vector<Digit> cell_digits(static_cast<std::size_t>(l));
  std::size_t next_cp = 0;
  for_each_tuple(stream, sched, N, [&](std::uint64_t n, std::span<const Digit> x) {
    ++cnt[cell_of(a, x)];
    if (next_cp < cps.size() && n == cps[next_cp]) {
      Rational S = 0;
      std::vector<Rational> Si(static_cast<std::size_t>(l), Rational(0));
      for (std::size_t c = 0; c < cells; ++c) {
        if (cnt[c] == 0) continue;
        std::size_t rest = c;
        for (int i = l - 1; i >= 0; --i) {
          cell_digits[static_cast<std::size_t>(i)] =
              a.first + static_cast<Digit>(rest % m);
          rest /= m;
        }
        const Rational w{BigInt(cnt[c])};
        S += w * F.eval_exact(cell_digits);
        for (int i = 1; i <= l; ++i)
          Si[static_cast<std::size_t>(i - 1)] +=
              w * decomp.comp[static_cast<std::size_t>(i - 1)]
                            [c / strides[static_cast<std::size_t>(i - 1)]];
      }
      Rational recon = Rational(BigInt(n)) * decomp.mean;
      for (const auto& s : Si) recon += s;
      if (recon != S)
        throw ValidationError("component sums fail to reconstruct the full sum at n=" +
                              std::to_string(n));
      const Rational nn{BigInt(n)};
      tr.averages.push_back(to_double(S / nn));
      for (int i = 0; i < l; ++i)
        tr.component_averages[static_cast<std::size_t>(i)].push_back(
            to_double(Si[static_cast<std::size_t>(i)] / nn));
      ++next_cp;
    }
  });
  return tr;
}

std::map<Word, std::uint64_t> count_frequencies(const DigitStream& stream,
                                                const schedules::Schedule& sched,
                                                std::span<const Word> words, std::uint64_t N) {
  require_admissible(sched, N);
  const int l = sched.arity();
  for (const auto& w : words)
    if (static_cast<int>(w.size()) != l)
      throw ValidationError("requested word length does not match the schedule arity");
  std::map<Word, std::uint64_t> counts;
  for_each_tuple(stream, sched, N, [&](std::uint64_t, std::span<const Digit> x) {
    ++counts[Word(x.begin(), x.end())];
  });
  if (!words.empty()) {
    std::map<Word, std::uint64_t> picked;
    for (const auto& w : words) {
      auto it = counts.find(w);
      picked[w] = it == counts.end() ? 0 : it->second;
    }
    return picked;
  }
  return counts;
}

std::map<std::pair<Word, Word>, std::uint64_t> count_pair_frequencies(
    const DigitStream& stream, const schedules::Schedule& sched, std::uint64_t N) {
  require_admissible(sched, N);
  const int l = sched.arity();
  auto evals = make_evals(sched, N);
  // the shifted tuple peeks one index past q_l(N)
  sched.q.back().eval(static_cast<std::int64_t>(N));
  std::map<std::pair<Word, Word>, std::uint64_t> counts;
  Word x(static_cast<std::size_t>(l)), y(static_cast<std::size_t>(l));
  for (std::uint64_t n = 1; n <= N; ++n) {
    for (int i = 0; i < l; ++i) {
      const auto q = static_cast<std::uint64_t>(
          evals[static_cast<std::size_t>(i)].at(static_cast<std::int64_t>(n)));
      x[static_cast<std::size_t>(i)] = stream.at(q);
      y[static_cast<std::size_t>(i)] = stream.at(q + 1);
    }
    ++counts[{x, y}];
  }
  return counts;
}

FrequencySpec FrequencySpec::product_form(const std::vector<double>& r, Digit first,
                                          int word_len) {
  if (r.empty() || word_len < 1) throw ValidationError("empty weight vector or word length < 1");
  const std::size_t m = r.size();
  std::size_t total = 1;
  for (int i = 0; i < word_len; ++i) {
    if (total > std::size_t{10'000'000} / m)
      throw ResourceCapError("product-form spec exceeds 10000000 words");
    total *= m;
  }
  FrequencySpec spec;
  spec.word_len = word_len;
  Word w(static_cast<std::size_t>(word_len));
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t rest = t;
    double p = 1;
    for (int i = word_len - 1; i >= 0; --i) {
      const std::size_t d = rest % m;
      rest /= m;
      w[static_cast<std::size_t>(i)] = first + static_cast<Digit>(d);
      p *= r[d];
    }
    if (p > 0) spec.target[w] = p;
  }
  return spec;
}

void FrequencySpec::validate(double tol) const {
  double total = 0;
  for (const auto& [w, p] : target) {
    if (static_cast<int>(w.size()) != word_len)
      throw ValidationError("spec word length mismatch");
    if (p < 0) throw ValidationError("negative target frequency");
    total += p;
  }
  if (std::abs(total - 1.0) > tol)
    throw ValidationError("target frequencies sum to " + std::to_string(total) +
                          ", expected 1");
}

MembershipReport check_membership(const std::map<Word, std::uint64_t>& counts, std::uint64_t N,
                                  const FrequencySpec& spec) {
  if (N == 0) throw ValidationError("need N >= 1");
  MembershipReport rep;
  rep.N = N;
  std::map<Word, std::pair<std::uint64_t, double>> merged;
  for (const auto& [w, c] : counts) merged[w].first = c;
  for (const auto& [w, p] : spec.target) merged[w].second = p;
  for (const auto& [w, cp] : merged) {
    MembershipRow row;
    row.word = w;
    row.count = cp.first;
    row.freq = static_cast<double>(cp.first) / static_cast<double>(N);
    row.target = cp.second;
    row.deviation = std::abs(row.freq - row.target);
    rep.sup_deviation = std::max(rep.sup_deviation, row.deviation);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace freqdim::nonconv
