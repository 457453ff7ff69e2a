#pragma once
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "freqdim/measures.hpp"
#include "freqdim/observables.hpp"
#include "freqdim/rational.hpp"
#include "freqdim/schedules.hpp"

namespace freqdim::mixing {

using measures::FiniteMarkovChain;
using Matrix = std::vector<std::vector<Rational>>;

Matrix mat_mul(const Matrix& A, const Matrix& B);
Matrix mat_pow(const Matrix& P, std::uint64_t n);

// Dependence between the sigma-algebra of states up to time t and the one of
// states from time t+n on, for the stationary chain. All four reduce to
// functionals of P^n and pi; the reductions are exact suprema over the full
// sigma-algebras, not heuristics (bilinear forms over [0,1]^s attain extremes
// at subset vertices, and ratio-type suprema at atoms).
Rational markov_psi(const FiniteMarkovChain&, std::uint64_t n);    // max |P^n_ij/pi_j - 1|
Rational markov_phi(const FiniteMarkovChain&, std::uint64_t n);    // max_i half l1 distance to pi
Rational markov_alpha(const FiniteMarkovChain&, std::uint64_t n);  // max_{S,T} |Cov(1_S, 1_T)|
double markov_rho(const FiniteMarkovChain&, std::uint64_t n);      // maximal correlation

// Exhaustive check of the psi reduction: enumerates all state-word pairs
// (past word ending at 0, future word starting at n, both of length
// `horizon`) and takes the sup of |P(A and B)/(P(A)P(B)) - 1| from directly
// multiplied path probabilities. Capped at 10^6 pairs.
Rational brute_force_psi(const FiniteMarkovChain&, std::uint64_t n, int horizon);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 1;
  std::size_t points = 0;
};
// least squares y ~ slope*x + intercept; flat data counts as perfectly fit
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

struct CoefficientRow {
  std::uint64_t n = 0;
  Rational psi, phi, alpha;
  double psi_d = 0, phi_d = 0, alpha_d = 0, rho = 0;
};

struct MixingReport {
  std::vector<CoefficientRow> rows;  // n = 1..n_max
  LinearFit psi_decay;               // ln psi against n
  bool psi_all_zero = false;
};
MixingReport mixing_report(const FiniteMarkovChain&, std::uint64_t n_max);

// The four upper bounds for the two-norm-interpolated dependence coefficient
// with exponent pair 1 <= p <= q, and their minimum.
struct BoundSet {
  double from_alpha = 0;  // (2 alpha)^(1/p-1/q)
  double from_rho = 0;    // 2^(1+1/p-1/q) rho^(1-1/p+1/q)
  double from_phi = 0;    // 2^(1+1/p) phi^(1-1/p)
  double from_psi = 0;    // psi
  double minimum = 0;
  const char* argmin = "";
};
BoundSet interpolation_bounds(double alpha, double rho, double phi, double psi, double p,
                              double q);

// Decay-class verdict: is a_n = O(n^(-1/2) (log n (log log n)^(1+delta))^(-1))?
// Classifies by an exponential-tail shortcut, then by the log-log slope of
// the weighted product a_n sqrt(n) L_n.
struct SizeHalfReport {
  bool yes = false;
  std::string mode;  // exponential | eventually-zero | bounded-product | diverging-product | inconclusive
  double sup_product = 0;
  std::uint64_t argmax = 0;
  double tail_slope = 0;
  double delta = 0;
};
SizeHalfReport size_minus_half(const std::function<double(std::uint64_t)>& a,
                               std::uint64_t n_max, double delta);

// The schedule-driven separation that controls the decay rate at (m, n):
// min(floor((q_i(n)-q_{i-1}(n))/3), floor((q_i(n)-q_i(n-m))/3)).
std::int64_t theoretical_gap(const schedules::Schedule&, int i, std::uint64_t m,
                             std::uint64_t n);

// Exact squared L2 norm of the conditional expectation of the centered
// component variable
//   Ybar_i(n) = comp_i(X(q_1(n)),...,X(q_i(n))) - E comp_i(...)
// given everything up to time q_i(n-m). The conditioning reduces to (digits
// at scheduled times <= t0, state at t0); coordinates past t0 are propagated
// by exact transition powers. For m > n (or t0 < 0) the sigma-algebra is
// trivial and the value is exactly 0.
Rational mixingale_norm2(const FiniteMarkovChain&, const observables::Decomposition&,
                         const schedules::Schedule&, int i, std::uint64_t m, std::uint64_t n);

// E comp_i(X(q_1(n)),...,X(q_i(n))) under the stationary chain, exact.
Rational centering_value(const FiniteMarkovChain&, const observables::Decomposition&,
                         const schedules::Schedule&, int i, std::uint64_t n);

// `exact` carries the squared norms (conditional table) or the absolute
// means (centering table); `value` is what the log fit runs on (the norm,
// resp. the absolute mean). Zero entries are excluded from the fit.
struct DecayTable {
  std::vector<std::uint64_t> grid;
  std::vector<Rational> exact;
  std::vector<double> value;
  LinearFit fit;
  bool all_zero = false;
};

DecayTable mixingale_decay(const FiniteMarkovChain&, const observables::Decomposition&,
                           const schedules::Schedule&, int i,
                           std::span<const std::uint64_t> m_grid, std::uint64_t n);
DecayTable centering_decay(const FiniteMarkovChain&, const observables::Decomposition&,
                           const schedules::Schedule&, int i,
                           std::span<const std::uint64_t> n_grid);

// Standing-assumption diagnostics for a chain at exponent pair (p, q): the
// coefficient table, the interpolation bounds at n=1 (reported under both
// subscript orders in circulation, which name the same coefficient), the
// observation-error statement, and the decay-class verdict for psi.
struct AssumptionReport {
  MixingReport coefficients;
  BoundSet varpi_bounds;
  std::array<std::string, 2> varpi_labels{"varpi_{q,p}", "varpi_{p,q}"};
  std::string subscript_note;
  std::string beta_statement;
  SizeHalfReport psi_size;
  double p = 1, q = 2;
};
AssumptionReport assumption_report(const FiniteMarkovChain&, double p, double q,
                                   std::uint64_t n_max, double delta);

}  // namespace freqdim::mixing
