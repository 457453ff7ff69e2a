#include "freqdim/schedules.hpp"

#include <algorithm>
#include <sstream>

#include "freqdim/errors.hpp"

namespace freqdim::schedules {

ScheduleFn ScheduleFn::poly(std::vector<std::int64_t> coeffs) {
  if (coeffs.empty()) throw ValidationError("polynomial schedule needs coefficients");
  ScheduleFn f;
  f.kind = Kind::Poly;
  f.coeffs = std::move(coeffs);
  return f;
}

ScheduleFn ScheduleFn::exponential(std::int64_t base, Rational scale) {
  if (base < 2) throw ValidationError("exponential schedule base must be >= 2");
  if (scale <= 0) throw ValidationError("exponential schedule scale must be positive");
  ScheduleFn f;
  f.kind = Kind::Exp;
  f.exp_base = base;
  f.exp_scale = std::move(scale);
  return f;
}

BigInt ScheduleFn::eval_big(std::int64_t n) const {
  if (n < 0) throw ValidationError("schedule argument must be >= 0");
  if (kind == Kind::Poly) {
    BigInt acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * n + *it;
    return acc;
  }
  if (n > 4096) throw ResourceCapError("exponential schedule argument exceeds cap of 4096");
  BigInt p = 1;
  for (std::int64_t k = 0; k < n; ++k) p *= exp_base;
  // floor(scale * base^n)
  const BigInt num = boost::multiprecision::numerator(exp_scale) * p;
  const BigInt den = boost::multiprecision::denominator(exp_scale);
  return num / den;
}

std::int64_t ScheduleFn::eval(std::int64_t n) const {
  const BigInt v = eval_big(n);
  if (v > (BigInt(1) << 62))
    throw ResourceCapError("schedule value at n=" + std::to_string(n) + " exceeds 2^62");
  return v.convert_to<std::int64_t>();
}

std::string ScheduleFn::describe() const {
  std::ostringstream os;
  if (kind == Kind::Poly) {
    os << "poly[";
    for (std::size_t i = 0; i < coeffs.size(); ++i) os << (i ? "," : "") << coeffs[i];
    os << "]";
  } else {
    os << "exp[" << format_rational(exp_scale) << "*" << exp_base << "^n]";
  }
  return os.str();
}

ValidationReport validate(const Schedule& s, std::int64_t n_max) {
  if (s.q.empty()) throw ValidationError("schedule needs at least one index function");
  if (s.epsilon <= 0 || s.epsilon > 1)
    throw ValidationError("gap parameter must lie in (0,1]");
  if (n_max < 1) throw ValidationError("validation range must reach at least n=1");
  const int l = s.arity();
  ValidationReport rep;
  rep.max_epsilon = 1;
  bool have_violation = false;
  auto record = [&](int i, std::int64_t n, const std::string& why) {
    if (have_violation) return;  // n-major scan order: first hit is the smallest
    have_violation = true;
    rep.ok = false;
    rep.violating_i = i;
    rep.violating_n = n;
    rep.reason = why;
  };
  std::vector<BigInt> cur(static_cast<std::size_t>(l)), nxt(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) nxt[static_cast<std::size_t>(i)] = s.q[static_cast<std::size_t>(i)].eval_big(1);
  const BigInt eps_num = boost::multiprecision::numerator(s.epsilon);
  const BigInt eps_den = boost::multiprecision::denominator(s.epsilon);
  for (std::int64_t n = 1; n <= n_max; ++n) {
    cur.swap(nxt);
    if (n < n_max)
      for (int i = 0; i < l; ++i)
        nxt[static_cast<std::size_t>(i)] = s.q[static_cast<std::size_t>(i)].eval_big(n + 1);
    for (int i = 0; i < l; ++i) {
      const BigInt& qi = cur[static_cast<std::size_t>(i)];
      if (qi < 1)
        record(i + 1, n,
               "q_" + std::to_string(i + 1) + "(" + std::to_string(n) + ") = " + qi.str() +
                   " is not a positive integer");
      if (i > 0) {
        const BigInt gap = qi - cur[static_cast<std::size_t>(i - 1)];
        // gap >= eps*n, exactly: gap*eps_den >= eps_num*n
        if (gap * eps_den < eps_num * n)
          record(i + 1, n,
                 "gap q_" + std::to_string(i + 1) + "-q_" + std::to_string(i) + " = " +
                     gap.str() + " < eps*n at n=" + std::to_string(n));
        rep.max_epsilon = std::min(rep.max_epsilon, Rational(gap, BigInt(n)));
      }
      if (n < n_max) {
        const BigInt growth = nxt[static_cast<std::size_t>(i)] - qi;
        if (growth * eps_den < eps_num)
          record(i + 1, n,
                 "growth q_" + std::to_string(i + 1) + "(" + std::to_string(n + 1) + ")-q_" +
                     std::to_string(i + 1) + "(" + std::to_string(n) + ") = " + growth.str() +
                     " < eps");
        rep.max_epsilon = std::min(rep.max_epsilon, Rational(growth));
      }
    }
  }
  if (rep.max_epsilon <= 0) rep.max_epsilon = 0;
  return rep;
}

std::int64_t max_index(const Schedule& s, std::int64_t N) {
  if (s.q.empty()) throw ValidationError("schedule needs at least one index function");
  return s.q.back().eval(N);
}

}  // namespace freqdim::schedules
