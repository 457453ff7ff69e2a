#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "freqdim/errors.hpp"
#include "freqdim/mixing.hpp"
#include "freqdim/rng.hpp"

using namespace freqdim;
using namespace freqdim::mixing;
using digits::Alphabet;
using digits::Digit;
using measures::FiniteMarkovChain;
using observables::Observable;
using schedules::Schedule;
using schedules::ScheduleFn;

namespace {

FiniteMarkovChain symmetric_quarter() {
  // P(0->1) = P(1->0) = 1/4; second eigenvalue 1/2, pi = (1/2, 1/2)
  return FiniteMarkovChain::from_transition(
      {{Rational(3, 4), Rational(1, 4)}, {Rational(1, 4), Rational(3, 4)}});
}

Schedule two_term() {
  Schedule s;
  s.q = {ScheduleFn::poly({0, 1}), ScheduleFn::poly({0, 2})};
  return s;
}

Rational inv_pow2(unsigned e) { return Rational(BigInt(1), BigInt(1) << e); }

observables::Decomposition corner_decomp(const FiniteMarkovChain& c) {
  auto mu = *measures::finite_marginal(measures::Law{c});
  Observable f = Observable::indicator_product(Alphabet::base(2), {0, 0});
  return observables::decompose(f, mu);
}

}  // namespace

TEST_SUITE_BEGIN("mixing");

TEST_CASE("exact matrix powers") {
  Matrix P = {{Rational(3, 4), Rational(1, 4)}, {Rational(1, 4), Rational(3, 4)}};
  Matrix P2 = mat_pow(P, 2);
  CHECK(P2[0][0] == Rational(5, 8));
  CHECK(P2[0][1] == Rational(3, 8));
  Matrix P0 = mat_pow(P, 0);
  CHECK(P0[0][0] == Rational(1));
  CHECK(P0[0][1] == Rational(0));
  Matrix P10 = mat_pow(P, 10);
  // P^n(0,0) = 1/2 + (1/2)^(n+1)
  CHECK(P10[0][0] == Rational(1, 2) + inv_pow2(11));
}

TEST_CASE("coefficients of the symmetric chain in closed form") {
  FiniteMarkovChain c = symmetric_quarter();
  for (unsigned n = 1; n <= 12; ++n) {
    // P^n_ij / pi_j - 1 = +-(1/2)^n
    CHECK(markov_psi(c, n) == inv_pow2(n));
    CHECK(markov_phi(c, n) == inv_pow2(n + 1));
    CHECK(markov_alpha(c, n) == inv_pow2(n + 2));
    CHECK(markov_rho(c, n) == doctest::Approx(std::pow(0.5, n)).epsilon(1e-10));
  }
}

TEST_CASE("coefficient orderings hold on asymmetric chains") {
  std::vector<FiniteMarkovChain> chains;
  chains.push_back(FiniteMarkovChain::from_transition(
      {{Rational(1, 2), Rational(1, 2)}, {Rational(1, 8), Rational(7, 8)}}));
  chains.push_back(FiniteMarkovChain::from_transition(
      {{Rational(9, 10), Rational(1, 10)}, {Rational(2, 5), Rational(3, 5)}}));
  chains.push_back(FiniteMarkovChain::from_transition({{Rational(1, 3), Rational(1, 3), Rational(1, 3)},
                                                       {Rational(1, 2), Rational(1, 4), Rational(1, 4)},
                                                       {Rational(1, 10), Rational(1, 10), Rational(4, 5)}}));
  for (const auto& c : chains) {
    for (unsigned n = 1; n <= 8; ++n) {
      Rational psi = markov_psi(c, n);
      CHECK(4 * markov_alpha(c, n) <= psi);
      CHECK(2 * markov_phi(c, n) <= psi);
      CHECK(markov_rho(c, n) <= to_double(psi) + 1e-9);
    }
  }
}

TEST_CASE("psi reduction agrees with the exhaustive sup") {
  FiniteMarkovChain c = FiniteMarkovChain::from_transition(
      {{Rational(1, 2), Rational(1, 2)}, {Rational(1, 4), Rational(3, 4)}});
  for (unsigned n = 1; n <= 3; ++n)
    for (int h = 1; h <= 3; ++h)
      CHECK(brute_force_psi(c, n, h) == markov_psi(c, n));
}

TEST_CASE("linear fits") {
  std::vector<double> xs, ys;
  for (int i = 1; i <= 10; ++i) {
    xs.push_back(i);
    ys.push_back(3.0 * i - 2.0);
  }
  LinearFit f = linear_fit(xs, ys);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> flat(5, 4.0), xflat = {1, 2, 3, 4, 5};
  CHECK(linear_fit(xflat, flat).r_squared == 1.0);

  std::vector<double> one = {1.0};
  CHECK_THROWS_AS(linear_fit(one, one), ValidationError);
  std::vector<double> samex = {2, 2, 2}, anyy = {1, 2, 3};
  CHECK_THROWS_AS(linear_fit(samex, anyy), ValidationError);
}

TEST_CASE("interpolation bound formulas") {
  BoundSet b = interpolation_bounds(0.01, 0.1, 0.2, 0.3, 2, 4);
  CHECK(b.from_alpha == doctest::Approx(std::pow(0.02, 0.25)).epsilon(1e-12));
  CHECK(b.from_rho == doctest::Approx(std::pow(2.0, 1.25) * std::pow(0.1, 0.75)).epsilon(1e-12));
  CHECK(b.from_phi == doctest::Approx(std::pow(2.0, 1.5) * std::pow(0.2, 0.5)).epsilon(1e-12));
  CHECK(b.from_psi == 0.3);
  CHECK(b.minimum == 0.3);
  CHECK(std::string(b.argmin) == "psi");
  CHECK_THROWS_AS(interpolation_bounds(0.1, 0.1, 0.1, 0.1, 4, 2), ValidationError);
}

TEST_CASE("decay-class verdicts") {
  auto geo = [](std::uint64_t n) { return std::pow(0.9, double(n)); };
  auto harmonic = [](std::uint64_t n) { return 1.0 / double(n); };
  auto root = [](std::uint64_t n) { return 1.0 / std::sqrt(double(n)); };
  SizeHalfReport g = size_minus_half(geo, 2000, 0.1);
  CHECK(g.yes);
  CHECK(g.mode == "exponential");
  SizeHalfReport h = size_minus_half(harmonic, 100000, 0.1);
  CHECK(h.yes);
  CHECK(h.mode == "bounded-product");
  SizeHalfReport r = size_minus_half(root, 100000, 0.1);
  CHECK(!r.yes);
  CHECK(r.mode == "diverging-product");
  auto zero = [](std::uint64_t) { return 0.0; };
  CHECK(size_minus_half(zero, 1000, 0.1).mode == "eventually-zero");
}

TEST_CASE("schedule separation at (m, n)") {
  Schedule s = two_term();
  // i=2: min(floor(n/3), floor(2m/3)) at n=64
  CHECK(theoretical_gap(s, 2, 2, 64) == 1);
  CHECK(theoretical_gap(s, 2, 4, 64) == 2);
  CHECK(theoretical_gap(s, 2, 8, 64) == 5);
  CHECK(theoretical_gap(s, 2, 16, 64) == 10);
  CHECK(theoretical_gap(s, 2, 32, 64) == 21);
  CHECK(theoretical_gap(s, 2, 64, 64) == 21);
}

TEST_CASE("conditional norms of the corner observable, exactly") {
  // chain with eigenvalue 1/2, F = 1{(0,0)}, schedule (n, 2n), n = 64.
  // Second component: conditioning at t0 = 2(n-m) leaves
  //   norm^2 = (1/2)^(4m)/8 - (1/2)^(2n)/16  while t0 >= n  (m <= 32)
  //   norm^2 = (1/2)^(4m)/16                 while 0 <= t0 < n (32 < m <= 64)
  //   0                                      once the window clears the past
  FiniteMarkovChain c = symmetric_quarter();
  auto d = corner_decomp(c);
  Schedule s = two_term();
  const Rational tail = inv_pow2(132);  // (1/2)^(2n)/16 at n = 64
  for (unsigned m = 1; m <= 32; ++m)
    CHECK(mixingale_norm2(c, d, s, 2, m, 64) == inv_pow2(4 * m + 3) - tail);
  for (unsigned m = 33; m <= 64; ++m)
    CHECK(mixingale_norm2(c, d, s, 2, m, 64) == inv_pow2(4 * m + 4));
  CHECK(mixingale_norm2(c, d, s, 2, 65, 64) == Rational(0));
  CHECK(mixingale_norm2(c, d, s, 2, 200, 64) == Rational(0));

  // First component: norm^2 = (1/2)^(2m)/16 for m <= n, 0 past it
  for (unsigned m = 1; m <= 64; ++m)
    CHECK(mixingale_norm2(c, d, s, 1, m, 64) == inv_pow2(2 * m + 4));
  CHECK(mixingale_norm2(c, d, s, 1, 65, 64) == Rational(0));
}

TEST_CASE("centering of the corner observable, exactly") {
  FiniteMarkovChain c = symmetric_quarter();
  auto d = corner_decomp(c);
  Schedule s = two_term();
  for (unsigned n : {1u, 2u, 5u, 16u, 64u}) {
    // E comp_2(X_n, X_2n) = (1/2)^(n+2); the first component is centered
    CHECK(centering_value(c, d, s, 2, n) == inv_pow2(n + 2));
    CHECK(centering_value(c, d, s, 1, n) == Rational(0));
  }
}

TEST_CASE("decay tables fit the logs") {
  FiniteMarkovChain c = symmetric_quarter();
  auto d = corner_decomp(c);
  Schedule s = two_term();
  std::vector<std::uint64_t> mg;
  for (std::uint64_t m = 2; m <= 32; ++m) mg.push_back(m);
  DecayTable t = mixingale_decay(c, d, s, 2, mg, 64);
  CHECK(!t.all_zero);
  REQUIRE(t.grid.size() == mg.size());
  CHECK(t.fit.r_squared > 0.999);
  // norm ~ (1/2)^(2m): slope of ln norm in m near 2 ln(1/2)
  CHECK(t.fit.slope == doctest::Approx(2 * std::log(0.5)).epsilon(0.02));
  CHECK(t.exact[0] == inv_pow2(11) - inv_pow2(132));
  CHECK(t.value[0] == doctest::Approx(std::sqrt(to_double(t.exact[0]))).epsilon(1e-12));

  std::vector<std::uint64_t> ng = {4, 8, 16, 32, 64};
  DecayTable ct = centering_decay(c, d, s, 2, ng);
  CHECK(ct.fit.r_squared > 0.999999);  // exactly log-linear
  CHECK(ct.fit.slope == doctest::Approx(std::log(0.5)).epsilon(1e-9));
  CHECK(ct.exact[0] == inv_pow2(6));

  DecayTable c1 = centering_decay(c, d, s, 1, ng);
  CHECK(c1.all_zero);
}

TEST_CASE("assumption report wires everything together") {
  FiniteMarkovChain c = symmetric_quarter();
  AssumptionReport rep = assumption_report(c, 2, 4, 12, 0.1);
  REQUIRE(rep.coefficients.rows.size() == 12);
  CHECK(rep.coefficients.rows[0].psi == Rational(1, 2));
  CHECK(rep.coefficients.psi_decay.slope == doctest::Approx(std::log(0.5)).epsilon(1e-6));
  CHECK(!rep.coefficients.psi_all_zero);
  CHECK(rep.psi_size.yes);  // geometric psi passes the summability class
  CHECK(rep.varpi_bounds.minimum > 0);
  CHECK(!rep.subscript_note.empty());
  CHECK(!rep.beta_statement.empty());
  CHECK(rep.varpi_labels[0] != rep.varpi_labels[1]);
}

TEST_SUITE_END();
