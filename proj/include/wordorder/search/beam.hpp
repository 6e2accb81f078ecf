#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "wordorder/core/bag.hpp"
#include "wordorder/ngram/unigram.hpp"
#include "wordorder/search/scorer.hpp"

namespace wo {

// Pruning regimes: plain model score, model score plus a unigram future-cost
// estimate for the words still in the bag, or model score minus a running
// upper bound built from the best conditional seen per word type.
enum class Heuristic { None, FutureCost, UpperBound };

Heuristic heuristic_from_string(const std::string& name);  // none | f | g
std::string heuristic_name(Heuristic h);

struct BeamConfig {
  std::size_t beam_size = 64;
  Heuristic heuristic = Heuristic::None;
  bool recombination = false;
  std::size_t recombination_context = 4;  // prefix tokens in the merge signature
  double f_weight = 1.0;                  // scale on the future-cost estimate
  // Renormalize each step's conditionals over the constrained candidate set
  // (off by default: the accumulated score s uses raw model conditionals).
  bool renormalize = false;
};

// One partial ordering: the chosen prefix, the tokens still to place, the
// accumulated natural-log model score, and the scorer state after the prefix.
struct Hypothesis {
  TokenSequence prefix;
  Bag remaining;
  double s = 0.0;
  ScorerStatePtr state;
  bool complete = false;
};

// Best conditional probability seen per word type during one sentence's
// decode (probability domain, initialized to zero, max-merged). Feeds the
// upper-bound heuristic.
class EstimateTable {
 public:
  explicit EstimateTable(std::size_t vocab_size) : best_(vocab_size, 0.0) {}

  double best(TokenId id) const { return best_.at(static_cast<std::size_t>(id)); }
  void update(TokenId id, double prob);
  void reset() { best_.assign(best_.size(), 0.0); }
  std::size_t size() const { return best_.size(); }

 private:
  std::vector<double> best_;
};

// Distinct word types still available, ascending by id. Throws InternalError
// on a complete hypothesis.
std::vector<TokenId> constrained_candidates(const Hypothesis& hyp);

// Max-merges one batch of candidate probabilities into the table.
void update_estimates(EstimateTable& table, std::span<const TokenId> words,
                      std::span<const double> probs);

// Upper bound on the prefix score: sum over prefix occurrences of the best
// probability seen for that type. Throws InternalError if a prefix type has
// no estimate yet (expansion order guarantees one exists).
double heuristic_g(const Hypothesis& hyp, const EstimateTable& estimates);

// Future-cost estimate: weight times the count-weighted unigram log
// probability of everything still in the bag. Zero once the bag is empty.
double heuristic_f(const Hypothesis& hyp, const UnigramTable& unigrams, double weight);

// Merges hypotheses sharing (remaining bag, last min(k, t) prefix tokens),
// keeping the best-s representative (ties: lexicographically smaller prefix).
std::vector<Hypothesis> recombine(std::vector<Hypothesis> candidates, std::size_t k,
                                  const Vocabulary& vocab);

struct SearchStats {
  std::size_t expansions = 0;   // hypotheses expanded
  std::size_t evaluations = 0;  // candidate conditionals computed
  std::size_t merges = 0;       // hypotheses absorbed by recombination
  // Largest s - g over all candidates at all pruning steps (upper-bound mode
  // only); admissibility means this never exceeds ~1e-9.
  double max_s_minus_g = -std::numeric_limits<double>::infinity();
};

// Multiset-constrained beam search: places every bag token exactly once,
// scores the end-of-sentence transition, and returns the surviving complete
// hypotheses sorted by s descending (ties: lexicographically smaller prefix
// first). The future-cost heuristic requires `unigrams`.
std::vector<Hypothesis> beam_search(const Bag& bag, const Scorer& scorer, const BeamConfig& config,
                                    const UnigramTable* unigrams = nullptr,
                                    SearchStats* stats = nullptr);

// Scores every distinct permutation of the bag (guard: at most 8 tokens) and
// returns the argmax by s; ties break toward the lexicographically smaller
// sequence. The oracle beam_search is measured against.
Hypothesis exhaustive_decode(const Bag& bag, const Scorer& scorer);

}  // namespace wo
