#pragma once
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "freqdim/digits.hpp"
#include "freqdim/measures.hpp"
#include "freqdim/rational.hpp"
#include "freqdim/rng.hpp"

namespace freqdim::observables {

using digits::Alphabet;
using digits::Digit;

// Declared regularity constants (bound, exponent, scale decay); bookkeeping
// for the standing-assumption report, not enforced pointwise.
struct HolderMeta {
  double bound = 1.0;
  double exponent = 1.0;
  double scale = 1.0;
};

// Function of an l-tuple of digits. Either the indicator of a fixed word
// (product of per-coordinate indicators; works on any alphabet) or a dense
// value table over a finite alphabet.
class Observable {
 public:
  enum class Kind { IndicatorProduct, Table };

  static Observable indicator_product(Alphabet a, std::vector<Digit> word);
  // values in lexicographic tuple order, values.size() == m^arity
  static Observable table(Alphabet a, int arity, std::vector<Rational> values);

  Kind kind() const { return kind_; }
  int arity() const { return arity_; }
  const Alphabet& alphabet() const { return alpha_; }
  const std::vector<Digit>& word() const { return word_; }
  const std::vector<Rational>& values() const { return table_; }
  HolderMeta& holder() { return holder_; }
  const HolderMeta& holder() const { return holder_; }

  Rational eval_exact(std::span<const Digit> x) const;
  double eval(std::span<const Digit> x) const;
  double sup_abs() const;  // max |F|

 private:
  Kind kind_ = Kind::IndicatorProduct;
  int arity_ = 0;
  Alphabet alpha_;
  std::vector<Digit> word_;
  std::vector<Rational> table_;
  std::vector<double> table_d_;
  HolderMeta holder_;
};

struct MeanResult {
  bool exact = true;
  Rational value;
  double value_d = 0;
  double stderr_est = 0;       // Monte Carlo only
  std::uint64_t samples = 0;   // Monte Carlo only
};

// integral of F against the product of l copies of the marginal; exhaustive
// sum over tuples (capped) for tables, closed-form product for indicators
MeanResult mean_exact(const Observable& F, const measures::FiniteMarginal& mu,
                      std::uint64_t tuple_cap = 10'000'000);
// indicator shortcut valid for any marginal weight function (infinite alphabets)
double mean_indicator(const Observable& F, const std::function<double(Digit)>& weight);
MeanResult mean_monte_carlo(const Observable& F, const measures::Law& mu, RngKey key,
                            std::uint64_t samples);

// Martingale-difference decomposition of F against a finite marginal mu:
//   F(x_1..x_l) = mean + sum_i comp_i(x_1..x_i),
// comp_i = (integral over coordinates > i) - (integral over coordinates >= i).
// Every comp_i integrates to zero in its last coordinate, for every prefix.
// Exact rationals throughout when mu is exact.
struct Decomposition {
  int arity = 0;
  Alphabet alpha;
  Rational mean;
  double mean_d = 0;
  std::vector<std::vector<Rational>> comp;    // comp[i-1] has m^i entries
  std::vector<std::vector<double>> comp_d;
  bool exact = true;

  const Rational& component_exact(int i, std::span<const Digit> prefix) const;
  double component(int i, std::span<const Digit> prefix) const;
};

Decomposition decompose(const Observable& F, const measures::FiniteMarginal& mu);

}  // namespace freqdim::observables
