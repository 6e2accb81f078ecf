#include "wordorder/ngram/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wordorder/errors.hpp"

namespace wo {

Smoothing smoothing_from_string(const std::string& name) {
  if (name == "auto") return Smoothing::Auto;
  if (name == "mle") return Smoothing::Mle;
  if (name == "wb" || name == "witten-bell") return Smoothing::WittenBell;
  if (name == "kn" || name == "kneser-ney") return Smoothing::KneserNey;
  throw UsageError("unknown smoothing '" + name + "' (expected auto, mle, wb, or kn)");
}

std::string smoothing_to_string(Smoothing s) {
  switch (s) {
    case Smoothing::Auto: return "auto";
    case Smoothing::Mle: return "mle";
    case Smoothing::WittenBell: return "wb";
    case Smoothing::KneserNey: return "kn";
  }
  throw InternalError("unhandled smoothing value");
}

NgramModelWriter::NgramModelWriter(int order, const Vocabulary& vocab) {
  model.order_ = order;
  model.tables_.resize(static_cast<std::size_t>(order));
  model.bos_ = vocab.bos();
  model.vocab_size_ = vocab.size();
  model.vocab_hash_ = vocab.hash();
}

std::string NgramModel::key_of(std::span<const TokenId> ids) {
  std::string key;
  key.reserve(ids.size() * sizeof(TokenId));
  for (TokenId id : ids) {
    key.append(reinterpret_cast<const char*>(&id), sizeof(TokenId));
  }
  return key;
}

double NgramModel::log10_prob(TokenId word, std::span<const TokenId> history) const {
  if (order_ < 1) throw InternalError("query against an empty model");
  const std::size_t keep = std::min<std::size_t>(history.size(), static_cast<std::size_t>(order_ - 1));
  std::span<const TokenId> h = history.subspan(history.size() - keep);

  double bow_sum = 0.0;
  while (true) {
    std::string key = key_of(h);
    key.append(reinterpret_cast<const char*>(&word), sizeof(TokenId));
    const auto& table = tables_[h.size()];
    if (auto it = table.find(key); it != table.end()) {
      return std::max(bow_sum + it->second.log10p, kLog10Floor);
    }
    if (h.empty()) {
      // Word absent even from the unigram level (reserved bos, or a
      // pure-MLE model queried with an unseen type).
      return kLog10Floor;
    }
    const auto& ctx_table = tables_[h.size() - 1];
    if (auto it = ctx_table.find(key_of(h)); it != ctx_table.end() && it->second.has_bow) {
      bow_sum += it->second.log10bow;
    }
    h = h.subspan(1);
  }
}

double NgramModel::log_prob(TokenId word, std::span<const TokenId> history) const {
  return log10_prob(word, history) * std::numbers::ln10;
}

double ngram_perplexity(const NgramModel& model, const Vocabulary& vocab,
                        const std::vector<TokenSequence>& corpus) {
  if (corpus.empty()) throw DataError("perplexity over an empty corpus");
  double total_log10 = 0.0;
  std::size_t n_predicted = 0;
  const std::size_t pad = static_cast<std::size_t>(model.order() - 1);
  for (const TokenSequence& sent : corpus) {
    TokenSequence padded(pad, vocab.bos());
    padded.insert(padded.end(), sent.begin(), sent.end());
    padded.push_back(vocab.eos());
    for (std::size_t t = pad; t < padded.size(); ++t) {
      total_log10 += model.log10_prob(padded[t], std::span(padded).subspan(0, t));
      ++n_predicted;
    }
  }
  return std::pow(10.0, -total_log10 / static_cast<double>(n_predicted));
}

}  // namespace wo
