#pragma once

#include <vector>

#include "wordorder/core/corpus.hpp"
#include "wordorder/core/vocabulary.hpp"
#include "wordorder/ngram/model.hpp"

namespace wo {

// Dense natural-log unigram probabilities used by the admissible-ish
// future-cost heuristic. Types with no estimate get a floor strictly below
// every stored value so they can never look better than an observed word.
class UnigramTable {
 public:
  UnigramTable(std::vector<double> logp, double floor);

  double value(TokenId id) const;
  double floor() const { return floor_; }
  std::size_t size() const { return logp_.size(); }

  // Relative frequency of real tokens (no eos, no padding).
  static UnigramTable from_corpus(const std::vector<TokenSequence>& corpus,
                                  const Vocabulary& vocab);
  // The unigram level of a back-off model, converted to natural log.
  static UnigramTable from_model(const NgramModel& model, const Vocabulary& vocab);

 private:
  std::vector<double> logp_;
  double floor_;
};

}  // namespace wo
