#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "freqdim/rational.hpp"

namespace freqdim::schedules {

// One index function q(n): either an integer-coefficient polynomial
// (constant term first) or floor(scale * base^n).
struct ScheduleFn {
  enum class Kind { Poly, Exp };
  Kind kind = Kind::Poly;
  std::vector<std::int64_t> coeffs;  // Poly
  std::int64_t exp_base = 2;         // Exp
  Rational exp_scale = 1;

  static ScheduleFn poly(std::vector<std::int64_t> coeffs);
  static ScheduleFn exponential(std::int64_t base, Rational scale);

  BigInt eval_big(std::int64_t n) const;
  // value as an index; throws ResourceCapError past 2^62
  std::int64_t eval(std::int64_t n) const;
  std::string describe() const;
};

// Index tuple (q_1, ..., q_l) with the gap parameter. Admissibility on a range
// [1, n_max] means: every q_i(n) is a positive integer, q_i(n) >= q_{i-1}(n) + eps*n
// for i >= 2, and q_i(n+1) >= q_i(n) + eps (growth checked for n+1 <= n_max;
// the range is never extrapolated).
struct Schedule {
  std::vector<ScheduleFn> q;
  Rational epsilon{1, 2};

  int arity() const { return static_cast<int>(q.size()); }
};

struct ValidationReport {
  bool ok = true;
  // smallest violating (i, n) in lexicographic (n, i) order; i is 1-based
  int violating_i = 0;
  std::int64_t violating_n = 0;
  std::string reason;
  // largest eps in (0,1] admissible on the range; 0 if none is
  Rational max_epsilon = 0;
};

ValidationReport validate(const Schedule&, std::int64_t n_max);

// largest index a length-N run touches: q_l(N)
std::int64_t max_index(const Schedule&, std::int64_t N);

}  // namespace freqdim::schedules
