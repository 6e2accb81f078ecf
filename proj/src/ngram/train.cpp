#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "wordorder/errors.hpp"
#include "wordorder/ngram/model.hpp"

namespace wo {
namespace {

using Key = std::string;
using CountMap = std::unordered_map<Key, std::uint64_t>;
using ProbMap = std::unordered_map<Key, double>;

TokenId last_id(const Key& key) {
  TokenId id;
  std::memcpy(&id, key.data() + key.size() - sizeof(TokenId), sizeof(TokenId));
  return id;
}

Key context_of(const Key& key) { return key.substr(0, key.size() - sizeof(TokenId)); }

// Drops the first token: the context used by the next-lower order.
Key suffix_of(const Key& key) { return key.substr(sizeof(TokenId)); }

bool starts_with_bos(const Key& key, TokenId bos) {
  TokenId first;
  std::memcpy(&first, key.data(), sizeof(TokenId));
  return first == bos;
}

// Raw counts of every k-gram window (k = 1..order) that ends at a predicted
// position — i.e. at a real token or at eos — of the padded sentence
// bos^(order-1) w_1..w_m eos.
std::vector<CountMap> count_windows(const std::vector<TokenSequence>& corpus,
                                    const Vocabulary& vocab, int order) {
  std::vector<CountMap> grams(static_cast<std::size_t>(order));
  const std::size_t pad = static_cast<std::size_t>(order - 1);
  for (const TokenSequence& sent : corpus) {
    TokenSequence padded(pad, vocab.bos());
    padded.insert(padded.end(), sent.begin(), sent.end());
    padded.push_back(vocab.eos());
    for (std::size_t t = pad; t < padded.size(); ++t) {
      for (int k = 1; k <= order; ++k) {
        std::span<const TokenId> win(padded.data() + t + 1 - k, static_cast<std::size_t>(k));
        ++grams[static_cast<std::size_t>(k - 1)][NgramModel::key_of(win)];
      }
    }
  }
  return grams;
}

// Probability tables built level by level in the linear domain; converted to
// ARPA-style log10 entries at the end. bow(h) equals the interpolation
// residual gamma(h), which keeps every stored context exactly normalized.
struct Builder {
  const Vocabulary& vocab;
  int order;
  std::vector<ProbMap> probs;            // seen-gram probabilities per level
  std::vector<ProbMap> bows;             // context -> back-off weight (level of the context)
  std::vector<double> unigram;           // dense over the whole vocab
  double unigram_backoff_mass = 0.0;     // gamma at the unigram level (over 1/|V~|)

  explicit Builder(const Vocabulary& v, int n)
      : vocab(v), order(n), probs(static_cast<std::size_t>(n)), bows(static_cast<std::size_t>(n)),
        unigram(v.size(), 0.0) {}

  double lower_prob(int k, const Key& key) const {
    // P_{k-1}(w | h minus its first token); the suffix window of a counted
    // k-gram is itself counted, so the lookup always hits for k-1 >= 2.
    if (k - 1 == 1) return unigram[static_cast<std::size_t>(last_id(key))];
    const ProbMap& lower = probs[static_cast<std::size_t>(k - 2)];
    auto it = lower.find(suffix_of(key));
    if (it == lower.end()) throw InternalError("missing lower-order gram during training");
    return it->second;
  }

  NgramModel finish() {
    NgramModelWriter writer(order, vocab);

    // Dense unigram level: every non-bos type gets an entry; bos is pinned
    // to the floor so it can never be predicted.
    for (TokenId id = 0; id < static_cast<TokenId>(vocab.size()); ++id) {
      NgramModel::Entry e;
      const double p = unigram[static_cast<std::size_t>(id)];
      e.log10p = (id == vocab.bos() || p <= 0.0) ? NgramModel::kLog10Floor : std::log10(p);
      writer.table(1).emplace(NgramModel::key_of(std::span(&id, 1)), e);
    }
    for (int k = 2; k <= order; ++k) {
      for (const auto& [key, p] : probs[static_cast<std::size_t>(k - 1)]) {
        NgramModel::Entry e;
        e.log10p = p > 0.0 ? std::max(std::log10(p), NgramModel::kLog10Floor)
                           : NgramModel::kLog10Floor;
        writer.table(k).emplace(key, e);
      }
    }
    // Pure-bos contexts are never predicted, hence never counted; they still
    // need entries so their back-off weights are reachable.
    for (int k = 1; k < order; ++k) {
      TokenSequence bos_run(static_cast<std::size_t>(k), vocab.bos());
      writer.table(k).try_emplace(NgramModel::key_of(bos_run));
    }
    for (int k = 1; k < order; ++k) {
      auto& table = writer.table(k);
      for (const auto& [ctx, bow] : bows[static_cast<std::size_t>(k - 1)]) {
        auto it = table.find(ctx);
        if (it == table.end()) throw InternalError("back-off weight for an unstored context");
        it->second.has_bow = true;
        it->second.log10bow =
            bow > 0.0 ? std::max(std::log10(bow), NgramModel::kLog10Floor) : NgramModel::kLog10Floor;
      }
    }
    return writer.take();
  }
};

void build_mle(Builder& b, const std::vector<CountMap>& grams) {
  double total = 0.0;
  for (const auto& [key, c] : grams[0]) total += static_cast<double>(c);
  for (const auto& [key, c] : grams[0])
    b.unigram[static_cast<std::size_t>(last_id(key))] = static_cast<double>(c) / total;

  for (int k = 2; k <= b.order; ++k) {
    std::unordered_map<Key, std::uint64_t> ctx_total;
    for (const auto& [key, c] : grams[static_cast<std::size_t>(k - 1)])
      ctx_total[context_of(key)] += c;
    for (const auto& [key, c] : grams[static_cast<std::size_t>(k - 1)]) {
      b.probs[static_cast<std::size_t>(k - 1)][key] =
          static_cast<double>(c) / static_cast<double>(ctx_total[context_of(key)]);
    }
    // No reserved mass: unseen continuations effectively get weight ~0.
    for (const auto& [ctx, c] : ctx_total) b.bows[static_cast<std::size_t>(k - 2)][ctx] = 0.0;
  }
}

void build_witten_bell(Builder& b, const std::vector<CountMap>& grams) {
  const double predictable = static_cast<double>(b.vocab.size() - 1);  // everything but bos
  double total = 0.0;
  for (const auto& [key, c] : grams[0]) total += static_cast<double>(c);
  const double t1 = static_cast<double>(grams[0].size());
  for (TokenId id = 0; id < static_cast<TokenId>(b.vocab.size()); ++id) {
    if (id == b.vocab.bos()) continue;
    auto it = grams[0].find(NgramModel::key_of(std::span(&id, 1)));
    const double c = it == grams[0].end() ? 0.0 : static_cast<double>(it->second);
    b.unigram[static_cast<std::size_t>(id)] = (c + t1 / predictable) / (total + t1);
  }
  b.unigram_backoff_mass = t1 / (total + t1);

  for (int k = 2; k <= b.order; ++k) {
    struct CtxStat {
      std::uint64_t total = 0;
      std::uint64_t types = 0;
    };
    std::unordered_map<Key, CtxStat> ctx;
    for (const auto& [key, c] : grams[static_cast<std::size_t>(k - 1)]) {
      CtxStat& s = ctx[context_of(key)];
      s.total += c;
      s.types += 1;
    }
    for (const auto& [key, c] : grams[static_cast<std::size_t>(k - 1)]) {
      const CtxStat& s = ctx.at(context_of(key));
      const double t = static_cast<double>(s.types);
      const double denom = static_cast<double>(s.total) + t;
      b.probs[static_cast<std::size_t>(k - 1)][key] =
          (static_cast<double>(c) + t * b.lower_prob(k, key)) / denom;
    }
    for (const auto& [ctx_key, s] : ctx) {
      const double t = static_cast<double>(s.types);
      b.bows[static_cast<std::size_t>(k - 2)][ctx_key] = t / (static_cast<double>(s.total) + t);
    }
  }
}

struct Discounts {
  double d1 = 0.0, d2 = 0.0, d3p = 0.0;
  double of(std::uint64_t c) const { return c == 1 ? d1 : (c == 2 ? d2 : d3p); }
};

std::optional<Discounts> estimate_discounts(const CountMap& counts) {
  std::uint64_t n[5] = {0, 0, 0, 0, 0};
  for (const auto& [key, c] : counts) {
    if (c >= 1 && c <= 4) ++n[c];
  }
  if (n[1] == 0 || n[2] == 0 || n[3] == 0) return std::nullopt;
  const double y = static_cast<double>(n[1]) / (static_cast<double>(n[1]) + 2.0 * static_cast<double>(n[2]));
  Discounts d;
  d.d1 = 1.0 - 2.0 * y * static_cast<double>(n[2]) / static_cast<double>(n[1]);
  d.d2 = 2.0 - 3.0 * y * static_cast<double>(n[3]) / static_cast<double>(n[2]);
  d.d3p = 3.0 - 4.0 * y * static_cast<double>(n[4]) / static_cast<double>(n[3]);
  if (d.d1 < 0.0 || d.d2 < 0.0 || d.d3p < 0.0) return std::nullopt;
  return d;
}

// Interpolated modified Kneser-Ney (Chen & Goodman). The top order keeps raw
// window counts; lower orders replace them with continuation counts (number
// of distinct one-token left extensions), except for grams that start with
// bos, which cannot be extended leftward past the padding and keep their raw
// counts. Returns false when discount estimation is ill-posed at any level.
bool build_kneser_ney(Builder& b, const std::vector<CountMap>& grams) {
  const int order = b.order;
  std::vector<CountMap> mod(static_cast<std::size_t>(order));
  mod[static_cast<std::size_t>(order - 1)] = grams[static_cast<std::size_t>(order - 1)];
  for (int k = order - 1; k >= 1; --k) {
    CountMap& level = mod[static_cast<std::size_t>(k - 1)];
    for (const auto& [key, c] : grams[static_cast<std::size_t>(k)]) level[suffix_of(key)] += 1;
    for (const auto& [key, c] : grams[static_cast<std::size_t>(k - 1)]) {
      if (starts_with_bos(key, b.vocab.bos())) level[key] = c;
    }
  }

  std::vector<Discounts> disc(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    auto d = estimate_discounts(mod[static_cast<std::size_t>(k - 1)]);
    if (!d) return false;
    disc[static_cast<std::size_t>(k - 1)] = *d;
  }

  const double predictable = static_cast<double>(b.vocab.size() - 1);
  {
    const Discounts& d = disc[0];
    double total = 0.0, gamma_num = 0.0;
    for (const auto& [key, c] : mod[0]) {
      total += static_cast<double>(c);
      gamma_num += d.of(c);
    }
    const double gamma = gamma_num / total;
    for (TokenId id = 0; id < static_cast<TokenId>(b.vocab.size()); ++id) {
      if (id == b.vocab.bos()) continue;
      auto it = mod[0].find(NgramModel::key_of(std::span(&id, 1)));
      const double c = it == mod[0].end() ? 0.0 : static_cast<double>(it->second);
      const double discounted = it == mod[0].end() ? 0.0 : c - d.of(it->second);
      b.unigram[static_cast<std::size_t>(id)] = discounted / total + gamma / predictable;
    }
    b.unigram_backoff_mass = gamma;
  }

  for (int k = 2; k <= order; ++k) {
    const Discounts& d = disc[static_cast<std::size_t>(k - 1)];
    const CountMap& level = mod[static_cast<std::size_t>(k - 1)];
    struct CtxStat {
      double total = 0.0;
      double gamma_num = 0.0;
    };
    std::unordered_map<Key, CtxStat> ctx;
    for (const auto& [key, c] : level) {
      CtxStat& s = ctx[context_of(key)];
      s.total += static_cast<double>(c);
      s.gamma_num += d.of(c);
    }
    for (const auto& [key, c] : level) {
      const CtxStat& s = ctx.at(context_of(key));
      const double gamma = s.gamma_num / s.total;
      b.probs[static_cast<std::size_t>(k - 1)][key] =
          (static_cast<double>(c) - d.of(c)) / s.total + gamma * b.lower_prob(k, key);
    }
    for (const auto& [ctx_key, s] : ctx)
      b.bows[static_cast<std::size_t>(k - 2)][ctx_key] = s.gamma_num / s.total;
  }
  return true;
}

}  // namespace

NgramModel train_ngram(const std::vector<TokenSequence>& corpus, const Vocabulary& vocab,
                       int order, Smoothing smoothing) {
  if (order < 1) throw UsageError("n-gram order must be at least 1");
  if (corpus.empty()) throw DataError("cannot train an n-gram model on an empty corpus");
  for (const TokenSequence& sent : corpus) {
    if (sent.empty()) throw DataError("cannot train an n-gram model on an empty sentence");
  }

  const std::vector<CountMap> grams = count_windows(corpus, vocab, order);
  Builder builder(vocab, order);
  switch (smoothing) {
    case Smoothing::Mle:
      build_mle(builder, grams);
      break;
    case Smoothing::WittenBell:
      build_witten_bell(builder, grams);
      break;
    case Smoothing::KneserNey:
      if (!build_kneser_ney(builder, grams)) {
        throw DataError(
            "modified Kneser-Ney discounts are ill-posed on this corpus "
            "(too few distinct count-of-count classes); use --smoothing wb");
      }
      break;
    case Smoothing::Auto: {
      Builder kn_builder(vocab, order);
      if (build_kneser_ney(kn_builder, grams)) return kn_builder.finish();
      build_witten_bell(builder, grams);
      break;
    }
  }
  return builder.finish();
}

}  // namespace wo
