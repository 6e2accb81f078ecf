#include "wordorder/search/scorer.hpp"

#include <numeric>

#include "wordorder/errors.hpp"

namespace wo {

std::pair<std::vector<double>, ScorerStatePtr> scorer_step(const Scorer& scorer,
                                                           const ScorerState& state,
                                                           TokenId word) {
  ScorerStatePtr next = scorer.advance(state, word);
  std::vector<TokenId> all(scorer.vocab().size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> dist(all.size());
  scorer.score_candidates(*next, all, dist);
  return {std::move(dist), std::move(next)};
}

// ------------------------------------------------------------------ n-gram

struct NgramScorer::State : ScorerState {
  TokenSequence window;  // last order-1 consumed tokens, oldest first
};

NgramScorer::NgramScorer(std::shared_ptr<const NgramModel> model, Vocabulary vocab)
    : model_(std::move(model)), vocab_(std::move(vocab)) {
  if (!model_) throw InternalError("NgramScorer requires a model");
  if (model_->vocab_hash() != vocab_.hash()) {
    throw DataError("n-gram model was built over a different vocabulary");
  }
}

ScorerStatePtr NgramScorer::init(const Bag*) const {
  auto state = std::make_shared<State>();
  state->window.assign(model_->order() - 1, vocab_.bos());
  return state;
}

ScorerStatePtr NgramScorer::advance(const ScorerState& state, TokenId word) const {
  const auto& s = dynamic_cast<const State&>(state);
  auto next = std::make_shared<State>();
  if (!s.window.empty()) {
    next->window.assign(s.window.begin() + 1, s.window.end());
    next->window.push_back(word);
  }
  return next;
}

void NgramScorer::score_candidates(const ScorerState& state, std::span<const TokenId> words,
                                   std::span<double> out) const {
  const auto& s = dynamic_cast<const State&>(state);
  for (std::size_t i = 0; i < words.size(); ++i) {
    out[i] = model_->log_prob(words[i], s.window);
  }
}

// ------------------------------------------------------------------ neural

struct NeuralScorer::State : ScorerState {
  NeuralStatePtr inner;
};

NeuralScorer::NeuralScorer(std::shared_ptr<const NeuralModel> model) : model_(std::move(model)) {
  if (!model_) throw InternalError("NeuralScorer requires a model");
}

ScorerStatePtr NeuralScorer::init(const Bag* bag) const {
  auto state = std::make_shared<State>();
  state->inner = model_->begin(bag);
  return state;
}

ScorerStatePtr NeuralScorer::advance(const ScorerState& state, TokenId word) const {
  const auto& s = dynamic_cast<const State&>(state);
  auto next = std::make_shared<State>();
  next->inner = model_->advance(*s.inner, word);
  return next;
}

void NeuralScorer::score_candidates(const ScorerState& state, std::span<const TokenId> words,
                                    std::span<double> out) const {
  const auto& s = dynamic_cast<const State&>(state);
  const std::vector<double>& dist = model_->log_dist(*s.inner);
  for (std::size_t i = 0; i < words.size(); ++i) {
    out[i] = dist[static_cast<std::size_t>(words[i])];
  }
}

}  // namespace wo
