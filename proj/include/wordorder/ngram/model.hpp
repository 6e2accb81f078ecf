#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wordorder/core/corpus.hpp"
#include "wordorder/core/vocabulary.hpp"

namespace wo {

// Auto = interpolated modified Kneser-Ney, falling back to Witten-Bell when
// discount estimation is ill-posed (missing count-of-count singletons or a
// negative discount).
enum class Smoothing { Auto, Mle, WittenBell, KneserNey };

Smoothing smoothing_from_string(const std::string& name);
std::string smoothing_to_string(Smoothing s);

// Back-off n-gram model in ARPA form: log10 probabilities plus log10 back-off
// weights per context. Immutable once trained/imported; queries are
// const and safe to share across decoding threads.
class NgramModel {
 public:
  static constexpr double kLog10Floor = -99.0;

  int order() const { return order_; }
  std::size_t vocab_hash() const { return vocab_hash_; }
  std::size_t entry_count(int k) const { return tables_.at(k - 1).size(); }

  // log10 P(word | history); history longer than order-1 is truncated from
  // the front. Recursive back-off; always finite (floored at kLog10Floor).
  double log10_prob(TokenId word, std::span<const TokenId> history) const;
  // Same in natural log (the scorer boundary).
  double log_prob(TokenId word, std::span<const TokenId> history) const;

  struct Entry {
    double log10p = kLog10Floor;
    double log10bow = 0.0;
    bool has_bow = false;
  };

  // Packed-id gram key, lowest order first.
  static std::string key_of(std::span<const TokenId> ids);

  const std::unordered_map<std::string, Entry>& table(int k) const { return tables_.at(k - 1); }

 private:
  friend struct NgramModelWriter;

  int order_ = 0;
  std::vector<std::unordered_map<std::string, Entry>> tables_;
  TokenId bos_ = -1;
  std::size_t vocab_size_ = 0;
  std::uint64_t vocab_hash_ = 0;
};

// Assembly handle used by training and ARPA import; everything else sees the
// model as immutable.
struct NgramModelWriter {
  NgramModel model;

  NgramModelWriter(int order, const Vocabulary& vocab);
  std::unordered_map<std::string, NgramModel::Entry>& table(int k) {
    return model.tables_.at(static_cast<std::size_t>(k - 1));
  }
  NgramModel take() { return std::move(model); }
};

// Trains on bos/eos-padded sentences. Throws UsageError for order < 1,
// DataError for an empty corpus or, with Smoothing::KneserNey, for ill-posed
// discounts (the message suggests the Witten-Bell fallback).
NgramModel train_ngram(const std::vector<TokenSequence>& corpus, const Vocabulary& vocab,
                       int order, Smoothing smoothing = Smoothing::Auto);

// Per-token perplexity over a held-out corpus, eos included.
double ngram_perplexity(const NgramModel& model, const Vocabulary& vocab,
                        const std::vector<TokenSequence>& corpus);

}  // namespace wo
