#pragma once
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freqdim/digits.hpp"
#include "freqdim/measures.hpp"
#include "freqdim/observables.hpp"
#include "freqdim/schedules.hpp"

namespace freqdim::nonconv {

using digits::Digit;
using digits::DigitStream;
using Word = std::vector<Digit>;

// Running averages S(N)/N of the scheduled sum
//   S(N) = sum_{n<=N} F(stream[q_1(n)], ..., stream[q_l(n)])
// recorded on a checkpoint grid, against the product-measure mean of F.
struct ConvergenceTrace {
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> averages;
  double target = 0;
  bool target_exact = false;
  // component_averages[i-1][c] = S_i(checkpoint c)/checkpoint; filled by
  // run_components only
  std::vector<std::vector<double>> component_averages;
  // provenance, stamped by the batch runner
  std::string config_hash;
  std::uint64_t seed = 0;

  double final_average() const { return averages.back(); }
  double final_deviation() const;
};

// Powers of two in [2^10, N) plus N itself; guarantees at least two
// checkpoints for N >= 2.
std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t N);

// The sum engine. Streams over n, counting tuple occurrences (finite
// alphabets) so memory is O(checkpoints + m^l); the law enters only through
// the target mean. Requires the schedule to be admissible on [1, N].
ConvergenceTrace run_slln(const DigitStream& stream, const schedules::Schedule& sched,
                          const observables::Observable& F, const measures::Law& mu,
                          std::uint64_t N, std::vector<std::uint64_t> checkpoints = {});

// Component sums S_i(N) = sum_{n<=N} comp_i(stream[q_1(n)], ..., stream[q_i(n)])
// for the decomposition of F. Verifies, in exact rational arithmetic at every
// checkpoint, that N*mean + sum_i S_i(N) equals S(N) recomputed from F itself;
// a mismatch throws ValidationError.
ConvergenceTrace run_components(const DigitStream& stream, const schedules::Schedule& sched,
                                const observables::Decomposition& decomp,
                                const observables::Observable& F, std::uint64_t N,
                                std::vector<std::uint64_t> checkpoints = {});

// Occurrence counts N_word = #{ n <= N : scheduled tuple == word }. With an
// empty `words` request, every observed tuple is reported; otherwise exactly
// the requested words (zeros included). Full-alphabet counts sum to N.
std::map<Word, std::uint64_t> count_frequencies(const DigitStream& stream,
                                                const schedules::Schedule& sched,
                                                std::span<const Word> words, std::uint64_t N);

// Counts of pairs: tuple at (q_1(n),...,q_l(n)) versus the tuple one index to
// the right, at (q_1(n)+1,...,q_l(n)+1).
std::map<std::pair<Word, Word>, std::uint64_t> count_pair_frequencies(
    const DigitStream& stream, const schedules::Schedule& sched, std::uint64_t N);

// Target occupation frequencies for l-digit words; sparse (absent = 0).
struct FrequencySpec {
  int word_len = 1;
  std::map<Word, double> target;

  // p_word = prod_i r[word_i - first] over all words of the finite alphabet
  static FrequencySpec product_form(const std::vector<double>& r, Digit first, int word_len);
  // nonnegative, total mass within tol of 1
  void validate(double tol = 1e-12) const;
};

struct MembershipRow {
  Word word;
  std::uint64_t count = 0;
  double freq = 0;
  double target = 0;
  double deviation = 0;
};

// Deviation table |N_word/N - p_word| over the union of the spec's support
// and the observed words. A diagnostic for frequency-set membership, not a
// proof (membership is a statement about the N -> infinity limit).
struct MembershipReport {
  std::vector<MembershipRow> rows;
  double sup_deviation = 0;
  std::uint64_t N = 0;
};

MembershipReport check_membership(const std::map<Word, std::uint64_t>& counts, std::uint64_t N,
                                  const FrequencySpec& spec);

}  // namespace freqdim::nonconv
