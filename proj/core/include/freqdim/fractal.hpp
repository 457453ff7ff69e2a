#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freqdim/digits.hpp"
#include "freqdim/measures.hpp"
#include "freqdim/rational.hpp"
#include "freqdim/rng.hpp"
#include "freqdim/schedules.hpp"

namespace freqdim::fractal {

using digits::Digit;
using digits::DigitStream;

struct DimensionResult {
  double value = 0;
  std::string formula;            // "bernoulli-entropy" | "markov-entropy"
  int zero_terms = 0;             // 0*ln(0) convention applications
  std::vector<double> inputs_echo;
};

// Entropy-over-log-base dimension of the set of base-m points whose digit
// frequencies match r: (-sum r_j ln r_j)/ln m, with 0 ln 0 = 0. The uniform
// vector returns exactly 1.
DimensionResult hd_bernoulli(const std::vector<Rational>& r, Digit m);

// Pair-frequency version: builds the transition law from the joint matrix R
// (rejecting inconsistent or non-primitive input with named diagnostics) and
// returns (-sum_i q_i Q_ij ln Q_ij)/ln m.
DimensionResult hd_markov(const std::vector<std::vector<Rational>>& R);

// Zero-filling perturbation of a probability vector: positive entries give up
// delta/k, zero slots receive delta/l. `valid` certifies the smallness
// conditions (positive entries stay above delta/k, and the filled-slot log
// weight is below the average log weight of the reduced entries, checked in
// exact arithmetic in exponentiated form); when valid,
// mixed_entropy <= perturbed_entropy. A vector with no zeros is returned
// unchanged with the no-op flag.
struct PerturbedVector {
  std::vector<Rational> r, r_delta;
  Rational delta;
  int k = 0, l = 0;
  bool noop = false;
  bool valid = false;
  double mixed_entropy = 0;      // -sum r_j ln r_delta_j
  double perturbed_entropy = 0;  // -sum r_delta_j ln r_delta_j
  double hd_original = 0, hd_perturbed = 0;
};
PerturbedVector perturb_bernoulli(const std::vector<Rational>& r, const Rational& delta);

// Rowwise analog for joint pair matrices. Rows without zeros are left
// untouched; perturbed rows keep their marginal q_i exactly. The stationary
// vector of the perturbed transition matrix is recomputed exactly.
// `display_bound` is the perturbed weighted log-mass bound
// -sum r_delta_ij max(1, qd_i/q_i) ln Qd_ij (natural-log scale; its source
// display is truncated, see `note`).
struct PerturbedMatrix {
  std::vector<std::vector<Rational>> R, R_delta, Q_delta;
  Rational delta;
  std::vector<Rational> q, q_delta;
  std::vector<int> k, l;
  std::vector<bool> row_noop;
  bool noop = false;
  bool valid = false;
  double mixed_entropy = 0;      // -sum r_ij ln Qd_ij
  double perturbed_entropy = 0;  // -sum rd_ij ln Qd_ij
  double hd_original = 0, hd_perturbed = 0;
  double display_bound = 0;
  std::string note;
};
PerturbedMatrix perturb_markov(const std::vector<std::vector<Rational>>& R,
                               const Rational& delta);

// Mass-scaling trace -ln(mass of the depth-n cylinder around the stream) /
// (n ln m) on the given grid. A zero-mass cylinder records an infinite value
// (its log mass is -infinity) and truncates the trace there.
struct LocalDimRow {
  std::uint64_t n = 0;
  double value = 0;
  bool zero = false;
};
struct LocalDimTrace {
  std::vector<LocalDimRow> rows;
  bool hit_zero = false;
  double final_value = 0;  // last finite value, 0 if none
};
LocalDimTrace local_dimension_trace(const measures::Law& law, const DigitStream& stream,
                                    std::span<const std::uint64_t> n_grid);

// Points with prescribed digit frequencies: iid base-m digits from r, or
// integer digits with the index-n digit drawn from the truncation of rbar to
// {1..n} (so digit(index i) <= i+1 always).
DigitStream construct_up_point(const measures::BernoulliLaw& r, RngKey key);
enum class CfPointMode { Iid, Truncated };
DigitStream construct_up_point(const measures::DigitWeightSeq& rbar, CfPointMode mode,
                               RngKey key);

// Sparse enormous-digit insertion: copies z except at stream indices
// k^2 + m(k), k = 1..k_max, where m(k) is the least value in [0, arity] that
// avoids every scheduled index q_i(k); the inserted digit is an integer
// strictly inside (b^(k^2), 2 b^(k^2)), the midpoint ceiling when that is
// interior and the least integer above b^(k^2) otherwise. At most k_max <=
// sqrt(N) of the first N digits change, so limiting frequencies survive.
struct GzbResult {
  DigitStream stream;
  std::vector<std::pair<std::uint64_t, Digit>> insertions;
};
GzbResult construct_gzb(const DigitStream& z, const Rational& b,
                        const schedules::Schedule& sched, int k_max);

// Lower-bound certificate for the dimension of a continued-fraction
// frequency set from one supplied digit law with finite support: entropy
// -sum w ln w over the estimated Lyapunov denominator 2/n ln(continuant_n),
// floored by the structural 1/2. A witness for the supplied law only, not a
// sup over laws.
struct CfCertificate {
  double entropy = 0;
  double lambda_hat = 0;
  double lambda_stderr = 0;
  double lower = 0.5;
  double structural_lower = 0.5;
  std::uint64_t n = 0;
  int seeds = 1;
  bool noisy = false;  // stderr above 1% of lambda_hat
};
CfCertificate cf_bound_certificate(const measures::BernoulliLaw& nu, RngKey key,
                                   std::uint64_t n, int num_seeds = 1);

}  // namespace freqdim::fractal
