#include "freqdim/digits.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "freqdim/errors.hpp"

namespace freqdim::digits {

std::string Alphabet::label() const {
  if (finite && first == 0) return std::to_string(size);
  return "inf";
}

struct DigitStream::Impl {
  Alphabet alpha;
  explicit Impl(Alphabet a) : alpha(a) {}
  virtual ~Impl() = default;
  virtual Digit get(std::uint64_t i) const = 0;
  virtual std::optional<std::uint64_t> len() const { return std::nullopt; }
};

namespace {

struct MaterializedImpl final : DigitStream::Impl {
  std::vector<Digit> d;
  MaterializedImpl(Alphabet a, std::vector<Digit> v) : Impl(a), d(std::move(v)) {}
  Digit get(std::uint64_t i) const override {
    if (i >= d.size()) throw ValidationError("digit index past end of finite stream");
    return d[i];
  }
  std::optional<std::uint64_t> len() const override { return d.size(); }
};

// eventually periodic digits of a rational: preperiod + cycle from long division
struct PeriodicImpl final : DigitStream::Impl {
  std::vector<Digit> pre, cycle;
  PeriodicImpl(Alphabet a, std::vector<Digit> p, std::vector<Digit> c)
      : Impl(a), pre(std::move(p)), cycle(std::move(c)) {}
  Digit get(std::uint64_t i) const override {
    if (i < pre.size()) return pre[i];
    return cycle[(i - pre.size()) % cycle.size()];
  }
};

struct PureGenImpl final : DigitStream::Impl {
  std::function<Digit(std::uint64_t)> fn;
  PureGenImpl(Alphabet a, std::function<Digit(std::uint64_t)> f) : Impl(a), fn(std::move(f)) {}
  Digit get(std::uint64_t i) const override { return fn(i); }
};

struct SeqImpl final : DigitStream::Impl {
  mutable std::shared_mutex mu;
  mutable std::vector<Digit> buf;
  mutable std::function<Digit()> next;
  std::uint64_t cap;
  SeqImpl(Alphabet a, std::function<Digit()> f, std::uint64_t c)
      : Impl(a), next(std::move(f)), cap(c) {}
  Digit get(std::uint64_t i) const override {
    {
      std::shared_lock lk(mu);
      if (i < buf.size()) return buf[i];
    }
    std::unique_lock lk(mu);
    if (i >= cap)
      throw ResourceCapError("sequential digit stream prefix would exceed cap of " +
                             std::to_string(cap) + " digits");
    while (buf.size() <= i) buf.push_back(next());
    return buf[i];
  }
};

struct OverrideImpl final : DigitStream::Impl {
  DigitStream base;
  std::unordered_map<std::uint64_t, Digit> ov;
  OverrideImpl(DigitStream b, std::vector<std::pair<std::uint64_t, Digit>> o)
      : Impl(b.alphabet()), base(std::move(b)) {
    for (auto& [i, d] : o) ov[i] = d;
  }
  Digit get(std::uint64_t i) const override {
    auto it = ov.find(i);
    return it != ov.end() ? it->second : base.at(i);
  }
  std::optional<std::uint64_t> len() const override { return base.length(); }
};

constexpr std::int64_t kMaxExpansionDen = 10'000'000;

}  // namespace

Digit DigitStream::at(std::uint64_t i) const {
  return impl_->get(i + offset_);
}

std::optional<std::uint64_t> DigitStream::length() const {
  auto l = impl_->len();
  if (!l) return std::nullopt;
  return *l >= offset_ ? *l - offset_ : 0;
}

const Alphabet& DigitStream::alphabet() const { return impl_->alpha; }

DigitStream DigitStream::materialized(Alphabet a, std::vector<Digit> d) {
  for (Digit x : d)
    if (!a.contains(x)) throw ValidationError("digit outside alphabet");
  return DigitStream(std::make_shared<MaterializedImpl>(a, std::move(d)));
}

DigitStream DigitStream::rational_expansion(const BigInt& num, const BigInt& den, Digit base) {
  if (base < 2) throw ValidationError("expansion base must be >= 2");
  if (base > 1'000'000) throw ResourceCapError("expansion base exceeds cap of 1000000");
  if (den == 0) throw ValidationError("zero denominator");
  BigInt n = num, d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  if (n < 0 || n >= d) throw ValidationError("rational must lie in [0,1)");
  if (d > kMaxExpansionDen)
    throw ResourceCapError("expansion denominator exceeds cap of " +
                           std::to_string(kMaxExpansionDen));
  const std::int64_t di = d.convert_to<std::int64_t>();
  std::int64_t r = n.convert_to<std::int64_t>();
  // long division; remainders repeat within den steps, giving preperiod + cycle
  std::vector<std::int32_t> seen(static_cast<std::size_t>(di), -1);
  std::vector<Digit> digits_out;
  std::int64_t pos = 0;
  while (seen[static_cast<std::size_t>(r)] < 0) {
    seen[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(pos);
    const std::int64_t t = r * base;
    digits_out.push_back(t / di);
    r = t % di;
    ++pos;
  }
  const std::int64_t cut = seen[static_cast<std::size_t>(r)];
  std::vector<Digit> pre(digits_out.begin(), digits_out.begin() + cut);
  std::vector<Digit> cycle(digits_out.begin() + cut, digits_out.end());
  return DigitStream(
      std::make_shared<PeriodicImpl>(Alphabet::base(base), std::move(pre), std::move(cycle)));
}

DigitStream DigitStream::cf_expansion(const BigInt& num, const BigInt& den) {
  auto e = expand_cf(num, den, static_cast<std::size_t>(-1));
  return DigitStream(
      std::make_shared<MaterializedImpl>(Alphabet::positive_integers(), std::move(e.digits)));
}

DigitStream DigitStream::pure_generator(Alphabet a, std::function<Digit(std::uint64_t)> fn) {
  return DigitStream(std::make_shared<PureGenImpl>(a, std::move(fn)));
}

DigitStream DigitStream::sequential_generator(Alphabet a, std::function<Digit()> next,
                                              std::uint64_t cap) {
  return DigitStream(std::make_shared<SeqImpl>(a, std::move(next), cap));
}

DigitStream DigitStream::with_overrides(const DigitStream& base,
                                        std::vector<std::pair<std::uint64_t, Digit>> overrides) {
  for (auto& [i, d] : overrides)
    if (!base.alphabet().contains(d)) throw ValidationError("override digit outside alphabet");
  return DigitStream(std::make_shared<OverrideImpl>(base, std::move(overrides)));
}

DigitStream shift(const DigitStream& s, std::uint64_t k) {
  return DigitStream(s.impl_, s.offset_ + k);
}

std::vector<Digit> expand_rational(const BigInt& num, const BigInt& den, Digit base,
                                   std::size_t count) {
  auto s = DigitStream::rational_expansion(num, den, base);
  std::vector<Digit> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = s.at(i);
  return out;
}

CfExpansion expand_cf(const BigInt& num, const BigInt& den, std::size_t max_count) {
  if (den == 0) throw ValidationError("zero denominator");
  BigInt n = num, d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  if (n < 0 || n >= d) throw ValidationError("rational must lie in [0,1)");
  CfExpansion out;
  // Euclidean algorithm: x = n/d, digit = floor(d/n), then x <- (d mod n)/n
  while (n != 0 && out.digits.size() < max_count) {
    BigInt a = d / n;
    BigInt r = d % n;
    if (a > std::numeric_limits<Digit>::max())
      throw ResourceCapError("continued-fraction digit exceeds 63-bit digit storage");
    out.digits.push_back(a.convert_to<Digit>());
    d = n;
    n = r;
  }
  out.terminated = (n == 0);
  return out;
}

std::vector<std::pair<BigInt, BigInt>> continuants(std::span<const Digit> ds) {
  std::vector<std::pair<BigInt, BigInt>> out;
  out.reserve(ds.size());
  BigInt p_prev = 1, p = 0;  // p_{-1}, p_0
  BigInt q_prev = 0, q = 1;  // q_{-1}, q_0
  for (Digit a : ds) {
    if (a < 1) throw ValidationError("continued-fraction digits must be positive");
    BigInt pn = a * p + p_prev;
    BigInt qn = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(pn);
    q = std::move(qn);
    out.emplace_back(p, q);
  }
  return out;
}

Rational CylinderInterval::left() const {
  Rational acc = 0;
  for (auto it = word.rbegin(); it != word.rend(); ++it) acc = (acc + *it) / base;
  return acc;
}

Rational CylinderInterval::length() const {
  return pow_rational(Rational(1, base), static_cast<unsigned>(word.size()));
}

bool CylinderInterval::contains(const CylinderInterval& finer) const {
  if (finer.base != base || finer.word.size() < word.size()) return false;
  return std::equal(word.begin(), word.end(), finer.word.begin());
}

bool CylinderInterval::contains_point(const Rational& x) const {
  const Rational l = left();
  return x >= l && x < l + length();
}

CylinderInterval cylinder(Digit base, std::span<const Digit> word) {
  if (base < 2) throw ValidationError("cylinder base must be >= 2");
  for (Digit d : word)
    if (d < 0 || d >= base) throw ValidationError("cylinder digit outside base alphabet");
  return CylinderInterval{base, std::vector<Digit>(word.begin(), word.end())};
}

void write_digit_word(std::ostream& os, const Alphabet& a, std::span<const Digit> word) {
  for (Digit d : word)
    if (!a.contains(d)) throw ValidationError("digit outside alphabet");
  os << "alphabet=" << a.label() << " count=" << word.size() << "\n";
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) os << ' ';
    os << word[i];
  }
  os << "\n";
}

std::pair<Alphabet, std::vector<Digit>> read_digit_word(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ConfigError("missing digit-word header");
  std::istringstream hs(header);
  std::string tok_a, tok_c;
  if (!(hs >> tok_a >> tok_c)) throw ConfigError("malformed digit-word header: " + header);
  std::string extra;
  if (hs >> extra) throw ConfigError("malformed digit-word header: " + header);
  if (tok_a.rfind("alphabet=", 0) != 0 || tok_c.rfind("count=", 0) != 0)
    throw ConfigError("malformed digit-word header: " + header);
  const std::string aval = tok_a.substr(9);
  Alphabet a;
  if (aval == "inf") {
    a = Alphabet::positive_integers();
  } else {
    try {
      a = Alphabet::base(std::stoll(aval));
    } catch (const std::exception&) {
      throw ConfigError("bad alphabet in header: " + aval);
    }
    if (a.size < 2) throw ConfigError("bad alphabet in header: " + aval);
  }
  std::uint64_t count = 0;
  try {
    count = std::stoull(tok_c.substr(6));
  } catch (const std::exception&) {
    throw ConfigError("bad count in header: " + tok_c);
  }
  std::vector<Digit> word;
  word.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Digit d;
    if (!(is >> d)) throw ConfigError("digit word shorter than declared count");
    if (!a.contains(d))
      throw ValidationError("digit " + std::to_string(d) + " outside declared alphabet");
    word.push_back(d);
  }
  return {a, std::move(word)};
}

}  // namespace freqdim::digits
