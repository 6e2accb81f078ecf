#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wordorder/core/bag.hpp"
#include "wordorder/core/vocabulary.hpp"
#include "wordorder/neural/model.hpp"
#include "wordorder/ngram/model.hpp"

namespace wo {

// Opaque per-scorer decoding state. States are persistent values: advancing
// returns a new state and never mutates the source, so beam hypotheses can
// branch freely.
class ScorerState {
 public:
  virtual ~ScorerState() = default;
};
using ScorerStatePtr = std::shared_ptr<const ScorerState>;

// Uniform face the decoder sees: every model scores "word given state" in
// natural log and advances by one consumed token. All scorers share the
// padding convention (state after init conditions on begin-of-sentence; the
// end-of-sentence token is scored like any word), so their log conditionals
// can be combined term by term.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::string name() const = 0;
  virtual const Vocabulary& vocab() const = 0;

  // State for the empty prefix. bag2seq-backed scorers require the bag and
  // cache its annotations; all others ignore it.
  virtual ScorerStatePtr init(const Bag* bag) const = 0;
  virtual ScorerStatePtr advance(const ScorerState& state, TokenId word) const = 0;

  // Natural-log conditionals at the state's next position, one per word.
  virtual void score_candidates(const ScorerState& state, std::span<const TokenId> words,
                                std::span<double> out) const = 0;
};
using ScorerPtr = std::shared_ptr<const Scorer>;

// Consumes `word`, returning the full-vocabulary log distribution for the
// position after it together with the advanced state.
std::pair<std::vector<double>, ScorerStatePtr> scorer_step(const Scorer& scorer,
                                                           const ScorerState& state, TokenId word);

// Back-off n-gram model as a scorer; state is the last order-1 token window,
// initially all begin-of-sentence padding.
class NgramScorer : public Scorer {
 public:
  NgramScorer(std::shared_ptr<const NgramModel> model, Vocabulary vocab);

  std::string name() const override { return "ngram"; }
  const Vocabulary& vocab() const override { return vocab_; }
  ScorerStatePtr init(const Bag* bag) const override;
  ScorerStatePtr advance(const ScorerState& state, TokenId word) const override;
  void score_candidates(const ScorerState& state, std::span<const TokenId> words,
                        std::span<double> out) const override;

  const NgramModel& model() const { return *model_; }

 private:
  struct State;
  std::shared_ptr<const NgramModel> model_;
  Vocabulary vocab_;
};

// Any trained neural model as a scorer; states wrap the model's own states,
// which already cache the next-position distribution.
class NeuralScorer : public Scorer {
 public:
  explicit NeuralScorer(std::shared_ptr<const NeuralModel> model);

  std::string name() const override { return model_->arch(); }
  const Vocabulary& vocab() const override { return model_->vocab(); }
  ScorerStatePtr init(const Bag* bag) const override;
  ScorerStatePtr advance(const ScorerState& state, TokenId word) const override;
  void score_candidates(const ScorerState& state, std::span<const TokenId> words,
                        std::span<double> out) const override;

  const NeuralModel& model() const { return *model_; }

 private:
  struct State;
  std::shared_ptr<const NeuralModel> model_;
};

}  // namespace wo
