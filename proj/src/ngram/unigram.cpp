#include "wordorder/ngram/unigram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "wordorder/errors.hpp"

namespace wo {
namespace {

// Floor below every stored log probability. The nominal value log(1/(10V))
// can sit above real estimates on skewed corpora, so it is additionally
// pushed one decade under the smallest stored value.
double resolve_floor(const std::vector<double>& logp, std::size_t vocab_size) {
  double lowest = 0.0;
  for (double v : logp) {
    if (std::isfinite(v)) lowest = std::min(lowest, v);
  }
  const double nominal = -std::log(10.0 * static_cast<double>(vocab_size));
  return std::min(nominal, lowest - std::numbers::ln10);
}

}  // namespace

UnigramTable::UnigramTable(std::vector<double> logp, double floor)
    : logp_(std::move(logp)), floor_(floor) {
  for (double& v : logp_) {
    if (!std::isfinite(v) || v < floor_) v = floor_;
  }
}

double UnigramTable::value(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= logp_.size()) {
    throw InternalError("unigram table queried with an out-of-range id");
  }
  return logp_[static_cast<std::size_t>(id)];
}

UnigramTable UnigramTable::from_corpus(const std::vector<TokenSequence>& corpus,
                                       const Vocabulary& vocab) {
  if (corpus.empty()) throw DataError("unigram table over an empty corpus");
  std::vector<double> counts(vocab.size(), 0.0);
  double total = 0.0;
  for (const TokenSequence& sent : corpus) {
    for (TokenId id : sent) {
      counts.at(static_cast<std::size_t>(id)) += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) throw DataError("unigram table over a corpus with no tokens");
  std::vector<double> logp(vocab.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0.0) logp[i] = std::log(counts[i] / total);
  }
  const double floor = resolve_floor(logp, vocab.size());
  return UnigramTable(std::move(logp), floor);
}

UnigramTable UnigramTable::from_model(const NgramModel& model, const Vocabulary& vocab) {
  std::vector<double> logp(vocab.size(), -std::numeric_limits<double>::infinity());
  for (TokenId id = 0; id < static_cast<TokenId>(vocab.size()); ++id) {
    if (id == vocab.bos()) continue;
    logp[static_cast<std::size_t>(id)] = model.log_prob(id, std::span<const TokenId>());
  }
  const double floor = resolve_floor(logp, vocab.size());
  return UnigramTable(std::move(logp), floor);
}

}  // namespace wo
