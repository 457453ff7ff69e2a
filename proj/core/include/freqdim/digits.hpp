#pragma once
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freqdim/rational.hpp"

namespace freqdim::digits {

using Digit = std::int64_t;

// Either the base-m symbols {first, ..., first+size-1} (first is 0 for base-m
// expansions, 1 for truncated digit laws) or all positive integers
// (continued-fraction digits).
struct Alphabet {
  bool finite = true;
  Digit size = 0;
  Digit first = 0;

  static Alphabet base(Digit m) { return {true, m, 0}; }
  static Alphabet finite_from(Digit first, Digit m) { return {true, m, first}; }
  static Alphabet positive_integers() { return {false, 0, 1}; }

  bool contains(Digit d) const {
    if (!finite) return d >= 1;
    return d >= first && d < first + size;
  }
  std::string label() const;  // "<m>" or "inf", as used in the text header
  bool operator==(const Alphabet&) const = default;
};

// Immutable handle to a digit sequence with random access. Sources either
// support O(1) access directly (materialized words, eventually periodic
// rational expansions, counter-based iid draws) or materialize a prefix on
// demand (chain-sampled digits); prefix growth is single-writer append under a
// shared lock, so concurrent readers are safe.
class DigitStream {
 public:
  DigitStream() = default;

  Digit at(std::uint64_t i) const;
  // Number of digits for finite streams (terminated continued fractions,
  // materialized words); infinite sources return nullopt.
  std::optional<std::uint64_t> length() const;
  const Alphabet& alphabet() const;
  bool valid() const { return impl_ != nullptr; }

  static DigitStream materialized(Alphabet a, std::vector<Digit> d);
  // base-m expansion of num/den in [0,1); infinite, zero tail for terminating
  // fractions. den is capped (remainder table is O(den)).
  static DigitStream rational_expansion(const BigInt& num, const BigInt& den, Digit base);
  // continued-fraction digits of num/den in [0,1); finite, Euclidean algorithm
  static DigitStream cf_expansion(const BigInt& num, const BigInt& den);
  // pure random-access source: fn(i) must be a function of i alone
  static DigitStream pure_generator(Alphabet a, std::function<Digit(std::uint64_t)> fn);
  // sequential source: next() is called exactly once per index, in order;
  // digits are buffered. Accessing at/after `cap` raises ResourceCapError.
  static DigitStream sequential_generator(Alphabet a, std::function<Digit()> next,
                                          std::uint64_t cap);
  // copy of `base` with the digits at the given indices replaced
  static DigitStream with_overrides(const DigitStream& base,
                                    std::vector<std::pair<std::uint64_t, Digit>> overrides);

  struct Impl;  // opaque source interface; definitions live with the factories

 private:
  explicit DigitStream(std::shared_ptr<const Impl> impl, std::uint64_t offset = 0)
      : impl_(std::move(impl)), offset_(offset) {}
  std::shared_ptr<const Impl> impl_;
  std::uint64_t offset_ = 0;

  friend DigitStream shift(const DigitStream& s, std::uint64_t k);
};

// Drops the first k digits; shift(shift(s, a), b) == shift(s, a+b).
DigitStream shift(const DigitStream& s, std::uint64_t k);

// --- operations on explicit digit words ---

// First `count` base-m digits of num/den (in [0,1)); zero tail convention.
std::vector<Digit> expand_rational(const BigInt& num, const BigInt& den, Digit base,
                                   std::size_t count);

struct CfExpansion {
  std::vector<Digit> digits;
  bool terminated = true;  // rationals always terminate
};
// Continued-fraction digits of num/den in [0,1); at most `max_count` digits.
CfExpansion expand_cf(const BigInt& num, const BigInt& den, std::size_t max_count);

// Convergent numerators/denominators (p_n, q_n) for n = 1..digits.size(),
// p_n = a_n p_{n-1} + p_{n-2}, q_n = a_n q_{n-1} + q_{n-2},
// (p_0, p_-1) = (0, 1), (q_0, q_-1) = (1, 0). Exact integers.
std::vector<std::pair<BigInt, BigInt>> continuants(std::span<const Digit> digits);

// --- cylinder intervals ---

// Base-m cylinder: the interval of reals in [0,1) whose expansion starts with
// `word`. Its length is base^-depth, kept as the (base, depth) pair; use
// length() for the exact rational.
struct CylinderInterval {
  Digit base = 2;
  std::vector<Digit> word;

  int depth() const { return static_cast<int>(word.size()); }
  Rational left() const;
  Rational length() const;
  std::pair<Digit, int> length_pow() const { return {base, depth()}; }
  // a deeper cylinder nests iff its word extends this one
  bool contains(const CylinderInterval& finer) const;
  bool contains_point(const Rational& x) const;
};

CylinderInterval cylinder(Digit base, std::span<const Digit> word);

// --- plain-text serialization ---
// One-line header "alphabet=<m|inf> count=<n>" then space-separated digits.
void write_digit_word(std::ostream& os, const Alphabet& a, std::span<const Digit> word);
std::pair<Alphabet, std::vector<Digit>> read_digit_word(std::istream& is);

}  // namespace freqdim::digits
