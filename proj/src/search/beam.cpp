#include "wordorder/search/beam.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "wordorder/errors.hpp"
#include "wordorder/kernels.hpp"

namespace wo {

Heuristic heuristic_from_string(const std::string& name) {
  if (name == "none") return Heuristic::None;
  if (name == "f") return Heuristic::FutureCost;
  if (name == "g") return Heuristic::UpperBound;
  throw UsageError("unknown heuristic '" + name + "' (expected none, f or g)");
}

std::string heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::None: return "none";
    case Heuristic::FutureCost: return "f";
    case Heuristic::UpperBound: return "g";
  }
  throw InternalError("unhandled heuristic");
}

void EstimateTable::update(TokenId id, double prob) {
  if (!(prob >= 0.0) || prob > 1.0 + 1e-9) {
    throw InternalError("estimate update outside the probability range");
  }
  double& slot = best_.at(static_cast<std::size_t>(id));
  slot = std::max(slot, std::min(prob, 1.0));
}

std::vector<TokenId> constrained_candidates(const Hypothesis& hyp) {
  if (hyp.remaining.empty()) {
    throw InternalError("constrained expansion of a complete hypothesis");
  }
  std::vector<TokenId> words;
  words.reserve(hyp.remaining.distinct());
  for (const Bag::Entry& e : hyp.remaining.entries()) words.push_back(e.id);
  return words;
}

void update_estimates(EstimateTable& table, std::span<const TokenId> words,
                      std::span<const double> probs) {
  for (std::size_t i = 0; i < words.size(); ++i) table.update(words[i], probs[i]);
}

double heuristic_g(const Hypothesis& hyp, const EstimateTable& estimates) {
  double g = 0.0;
  for (TokenId w : hyp.prefix) {
    const double best = estimates.best(w);
    if (best <= 0.0) {
      throw InternalError("prefix word has no estimate; expansion order violated");
    }
    g += std::log(best);
  }
  return g;
}

double heuristic_f(const Hypothesis& hyp, const UnigramTable& unigrams, double weight) {
  double f = 0.0;
  for (const Bag::Entry& e : hyp.remaining.entries()) {
    f += static_cast<double>(e.count) * unigrams.value(e.id);
  }
  return weight * f;
}

namespace {

// Byte-wise surface comparison of equal-role sequences; the deterministic
// tie-break used everywhere in the decoder.
bool lex_less(const TokenSequence& a, const TokenSequence& b, const Vocabulary& vocab) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [&](TokenId x, TokenId y) { return vocab.surface(x) < vocab.surface(y); });
}

std::span<const TokenId> signature_context(const TokenSequence& prefix, std::size_t k) {
  const std::size_t len = std::min(k, prefix.size());
  return {prefix.data() + (prefix.size() - len), len};
}

std::uint64_t signature_hash(const Bag& bag, std::span<const TokenId> context) {
  std::uint64_t h = bag.hash();
  for (TokenId w : context) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(w)) + 0x9e3779b97f4a7c15ULL +
         (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace

std::vector<Hypothesis> recombine(std::vector<Hypothesis> candidates, std::size_t k,
                                  const Vocabulary& vocab) {
  std::vector<Hypothesis> merged;
  merged.reserve(candidates.size());
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  for (Hypothesis& cand : candidates) {
    const std::span<const TokenId> ctx = signature_context(cand.prefix, k);
    auto& bucket = buckets[signature_hash(cand.remaining, ctx)];
    std::size_t* slot = nullptr;
    for (std::size_t& idx : bucket) {
      const Hypothesis& kept = merged[idx];
      if (kept.remaining == cand.remaining &&
          std::ranges::equal(signature_context(kept.prefix, k), ctx)) {
        slot = &idx;
        break;
      }
    }
    if (slot == nullptr) {
      bucket.push_back(merged.size());
      merged.push_back(std::move(cand));
    } else if (cand.s > merged[*slot].s ||
               (cand.s == merged[*slot].s && lex_less(cand.prefix, merged[*slot].prefix, vocab))) {
      merged[*slot] = std::move(cand);
    }
  }
  return merged;
}

std::vector<Hypothesis> beam_search(const Bag& bag, const Scorer& scorer, const BeamConfig& config,
                                    const UnigramTable* unigrams, SearchStats* stats) {
  if (bag.empty()) throw DataError("cannot decode an empty bag");
  if (config.beam_size < 1) throw UsageError("beam size must be >= 1");
  const Vocabulary& vocab = scorer.vocab();
  if (config.heuristic == Heuristic::FutureCost) {
    if (unigrams == nullptr) throw UsageError("the future-cost heuristic requires a unigram table");
    if (unigrams->size() != vocab.size()) {
      throw DataError("unigram table size disagrees with the scorer vocabulary");
    }
  }

  SearchStats local_stats;
  SearchStats& st = stats != nullptr ? *stats : local_stats;
  st = SearchStats{};

  // Fresh per sentence: estimates never leak across decodes.
  EstimateTable estimates(vocab.size());

  // A candidate continuation; the scorer state is advanced only for
  // hypotheses that survive pruning (state transitions dominate decode cost
  // for the neural scorers).
  struct Pending {
    Hypothesis hyp;  // state left null until the candidate survives
    ScorerStatePtr parent_state;
    TokenId word = 0;
    double rank = 0.0;
  };

  std::vector<Hypothesis> beam;
  beam.push_back(Hypothesis{{}, bag, 0.0, scorer.init(&bag), false});

  std::vector<double> scores;
  std::vector<Pending> pending;
  for (std::size_t t = 0; t < bag.size(); ++t) {
    pending.clear();
    for (const Hypothesis& parent : beam) {
      const std::vector<TokenId> words = constrained_candidates(parent);
      scores.resize(words.size());
      scorer.score_candidates(*parent.state, words, scores);
      if (config.renormalize) {
        const double lse = kernels::log_sum_exp(scores.data(), scores.size());
        for (double& lp : scores) lp -= lse;
      }
      st.expansions += 1;
      st.evaluations += words.size();

      // The estimates are fed by exactly the conditionals computed here; the
      // upper-bound heuristic never triggers extra model evaluations.
      for (std::size_t i = 0; i < words.size(); ++i) {
        estimates.update(words[i], std::exp(scores[i]));
      }
      for (std::size_t i = 0; i < words.size(); ++i) {
        Pending p;
        p.hyp.prefix = parent.prefix;
        p.hyp.prefix.push_back(words[i]);
        p.hyp.remaining = parent.remaining;
        p.hyp.remaining.remove_one(words[i]);
        p.hyp.s = parent.s + scores[i];
        p.hyp.complete = p.hyp.remaining.empty();
        p.parent_state = parent.state;
        p.word = words[i];
        pending.push_back(std::move(p));
      }
    }

    if (config.recombination) {
      // Same signature merging as recombine(); kept inline so survivors keep
      // the parent pointers needed to advance their scorer states lazily.
      std::vector<Pending> merged;
      merged.reserve(pending.size());
      std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
      const std::size_t k = config.recombination_context;
      for (Pending& cand : pending) {
        const std::span<const TokenId> ctx = signature_context(cand.hyp.prefix, k);
        auto& bucket = buckets[signature_hash(cand.hyp.remaining, ctx)];
        std::size_t* slot = nullptr;
        for (std::size_t& idx : bucket) {
          const Hypothesis& kept = merged[idx].hyp;
          if (kept.remaining == cand.hyp.remaining &&
              std::ranges::equal(signature_context(kept.prefix, k), ctx)) {
            slot = &idx;
            break;
          }
        }
        if (slot == nullptr) {
          bucket.push_back(merged.size());
          merged.push_back(std::move(cand));
        } else {
          Pending& kept = merged[*slot];
          if (cand.hyp.s > kept.hyp.s ||
              (cand.hyp.s == kept.hyp.s && lex_less(cand.hyp.prefix, kept.hyp.prefix, vocab))) {
            kept = std::move(cand);
          }
          st.merges += 1;
        }
      }
      pending = std::move(merged);
    }

    // Ranks are assigned at pruning time; in upper-bound mode g reflects the
    // table state after every expansion this step contributed.
    for (Pending& p : pending) {
      switch (config.heuristic) {
        case Heuristic::None:
          p.rank = p.hyp.s;
          break;
        case Heuristic::FutureCost:
          p.rank = p.hyp.s + heuristic_f(p.hyp, *unigrams, config.f_weight);
          break;
        case Heuristic::UpperBound:
          p.rank = p.hyp.s - heuristic_g(p.hyp, estimates);
          st.max_s_minus_g = std::max(st.max_s_minus_g, p.rank);
          break;
      }
    }

    std::sort(pending.begin(), pending.end(), [&](const Pending& a, const Pending& b) {
      if (a.rank != b.rank) return a.rank > b.rank;
      return lex_less(a.hyp.prefix, b.hyp.prefix, vocab);
    });
    if (pending.size() > config.beam_size) pending.resize(config.beam_size);

    beam.clear();
    beam.reserve(pending.size());
    for (Pending& p : pending) {
      p.hyp.state = scorer.advance(*p.parent_state, p.word);
      beam.push_back(std::move(p.hyp));
    }
  }

  // End-of-sequence transition: complete orderings compete on full-sentence
  // model score. Under renormalization the candidate set here is the
  // singleton {eos}, contributing exactly zero.
  const TokenId eos = vocab.eos();
  for (Hypothesis& hyp : beam) {
    if (!config.renormalize) {
      double lp = 0.0;
      scorer.score_candidates(*hyp.state, {&eos, 1}, {&lp, 1});
      hyp.s += lp;
      st.evaluations += 1;
    }
  }

  // Final ranking is pure model score regardless of the pruning heuristic.
  std::sort(beam.begin(), beam.end(), [&](const Hypothesis& a, const Hypothesis& b) {
    if (a.s != b.s) return a.s > b.s;
    return lex_less(a.prefix, b.prefix, vocab);
  });

  for (const Hypothesis& hyp : beam) {
    if (!hyp.complete || !(bag_of_words(hyp.prefix) == bag)) {
      throw InternalError("decode produced a sequence that is not a permutation of the bag");
    }
  }
  return beam;
}

Hypothesis exhaustive_decode(const Bag& bag, const Scorer& scorer) {
  if (bag.empty()) throw DataError("cannot decode an empty bag");
  if (bag.size() > 8) {
    throw UsageError("exhaustive decoding is limited to bags of at most 8 tokens");
  }
  const Vocabulary& vocab = scorer.vocab();
  const TokenId eos = vocab.eos();

  // Types in surface order: the depth-first walk then emits permutations in
  // lexicographic order, so keeping the first strict maximum implements the
  // lex tie-break for free.
  std::vector<TokenId> types;
  std::vector<std::int32_t> counts;
  for (const Bag::Entry& e : bag.entries()) {
    types.push_back(e.id);
    counts.push_back(e.count);
  }
  std::vector<std::size_t> order(types.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return vocab.surface(types[a]) < vocab.surface(types[b]);
  });

  Hypothesis best;
  best.s = -std::numeric_limits<double>::infinity();
  bool found = false;
  TokenSequence prefix;
  prefix.reserve(bag.size());

  std::vector<TokenId> live;
  std::vector<double> scores;
  auto dfs = [&](auto&& self, const ScorerStatePtr& state, double s) -> void {
    if (prefix.size() == bag.size()) {
      double lp = 0.0;
      scorer.score_candidates(*state, {&eos, 1}, {&lp, 1});
      if (!found || s + lp > best.s) {
        best.prefix = prefix;
        best.s = s + lp;
        best.state = state;
        found = true;
      }
      return;
    }
    live.clear();
    for (std::size_t i : order) {
      if (counts[i] > 0) live.push_back(types[i]);
    }
    scores.resize(live.size());
    scorer.score_candidates(*state, live, scores);
    const std::vector<TokenId> step_words = live;   // recursion reuses the buffers
    const std::vector<double> step_scores = scores;
    for (std::size_t j = 0; j < step_words.size(); ++j) {
      const TokenId w = step_words[j];
      for (std::size_t i = 0; i < types.size(); ++i) {
        if (types[i] == w) {
          --counts[i];
          break;
        }
      }
      prefix.push_back(w);
      self(self, scorer.advance(*state, w), s + step_scores[j]);
      prefix.pop_back();
      for (std::size_t i = 0; i < types.size(); ++i) {
        if (types[i] == w) {
          ++counts[i];
          break;
        }
      }
    }
  };
  dfs(dfs, scorer.init(&bag), 0.0);

  best.remaining = Bag();
  best.complete = true;
  return best;
}

}  // namespace wo
