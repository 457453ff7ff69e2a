#pragma once
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "freqdim/digits.hpp"
#include "freqdim/rational.hpp"
#include "freqdim/rng.hpp"

namespace freqdim::measures {

using digits::Alphabet;
using digits::Digit;
using digits::DigitStream;

// iid digit law over a finite alphabet. Weights are exact rationals whenever
// the caller supplied rationals; the double mirror is what sampling uses.
struct BernoulliLaw {
  Alphabet alpha;
  std::vector<Rational> w;   // populated iff exact
  std::vector<double> wd;
  std::vector<double> cdf;
  bool exact = true;

  static BernoulliLaw from_weights(std::vector<Rational> w, Digit first = 0);
  static BernoulliLaw from_doubles(std::vector<double> w, Digit first = 0);
  Digit sample(double u) const;
  double weight_d(Digit d) const;
  const Rational& weight(Digit d) const;  // exact laws only
};

// Stationary one-step digit-pair law given by a joint matrix R over pairs:
// marginal q_i = sum_j R[i][j], transitions Q[i][j] = R[i][j]/q_i. Valid only
// when the pair frequencies are consistent (equal row and column marginals)
// and some power of R is strictly positive.
struct MarkovLaw {
  Digit m = 0;
  std::vector<std::vector<Rational>> R, Q;
  std::vector<Rational> q;
  std::vector<std::vector<double>> Qcdf;
  std::vector<double> qcdf;

  static MarkovLaw from_joint(std::vector<std::vector<Rational>> R);
};

// Digit law of the invariant measure of the continued-fraction shift:
// weight(j) = log2(1 + 1/(j(j+2))), j >= 1. Weights are irrational; the CDF
// telescopes to 1 - log2(1 + 1/(j+1)), which gives closed-form sampling.
struct GaussMarginalLaw {
  double weight(Digit j) const;
  double cdf(Digit j) const;  // P(digit <= j)
  Digit sample(double u) const;
};

// Observed finite-state chain: transition matrix P with exact stationary
// vector, digits are obs[state] (identity map by default).
struct FiniteMarkovChain {
  int s = 0;
  std::vector<std::vector<Rational>> P;
  std::vector<Rational> pi;
  std::vector<Digit> obs;
  Alphabet obs_alpha;
  bool primitive = false;
  std::vector<std::vector<double>> Pcdf;
  std::vector<double> picdf;

  static FiniteMarkovChain from_transition(std::vector<std::vector<Rational>> P,
                                           std::vector<Digit> obs = {});
};

using Law = std::variant<BernoulliLaw, MarkovLaw, GaussMarginalLaw, FiniteMarkovChain>;

Alphabet law_alphabet(const Law&);

// Stream of digits sampled from the law, keyed by (seed, stream id). iid laws
// give pure random access; chain-backed laws materialize a prefix (capped).
DigitStream sample_stream(const Law&, RngKey key,
                          std::uint64_t sequential_cap = (1ull << 26));

struct MassResult {
  bool exact = false;
  Rational mass;    // exact laws only
  double log_mass;  // natural log; -inf for zero-mass cylinders
  bool zero = false;
};
MassResult cylinder_mass(const Law&, std::span<const Digit> word);

// One-dimensional marginal as a finite weight vector (Bernoulli: w, Markov: q,
// chain: pi pushed through obs). nullopt for infinite alphabets.
struct FiniteMarginal {
  Alphabet alpha;
  std::vector<Rational> w;
  std::vector<double> wd;
  bool exact = true;
};
std::optional<FiniteMarginal> finite_marginal(const Law&);

// Weight sequence over positive integers for continued-fraction digit models:
// an explicit finite prefix (exact; zero beyond) or the Gauss marginals.
struct DigitWeightSeq {
  enum class Kind { Finite, Gauss };
  Kind kind = Kind::Finite;
  std::vector<Rational> prefix;  // weight of digit j is prefix[j-1]
  std::vector<double> prefix_d;
  std::vector<double> psums;  // prefix sums of prefix_d

  static DigitWeightSeq finite(std::vector<Rational> prefix);
  static DigitWeightSeq gauss();
  bool exact() const { return kind == Kind::Finite; }
  double weight_d(Digit j) const;
  Rational weight(Digit j) const;  // Finite only
  double prefix_sum_d(Digit n) const;
  Rational prefix_sum(Digit n) const;  // Finite only
};

// Law of the n-th digit under the positivity-restoring truncation
//   w_k = (r_k + n^-3) / (prefix_sum(n) + n^-2),  k = 1..n.
// Exact rationals when rbar is a finite rational prefix.
BernoulliLaw truncated_bernoulli(const DigitWeightSeq& rbar, Digit n);

// Digit at index i drawn from truncated_bernoulli(rbar, i+1); pure random
// access (binary search against the truncated CDF, no materialization).
DigitStream truncated_cf_stream(const DigitWeightSeq& rbar, RngKey key);

// iid stream from a weight sequence over positive integers
DigitStream iid_cf_stream(const DigitWeightSeq& rbar, RngKey key);

}  // namespace freqdim::measures
