#pragma once

#include "wordorder/neural/model.hpp"

namespace wo {

// Feedforward n-gram language model: the last `context` word embeddings are
// concatenated, passed through one tanh hidden layer, and projected to a
// full softmax. Default context width 4 makes it a 5-gram model.
class NplmModel : public NeuralModel {
 public:
  NplmModel(Vocabulary vocab, std::size_t embed, std::size_t hidden, std::size_t context);

  std::string arch() const override { return "nplm"; }
  std::vector<std::size_t> dims() const override;
  std::size_t context_width() const { return context_; }

  double accumulate_gradients(const TokenSequence& sentence) override;
  double sentence_loss(const TokenSequence& sentence) const override;

  NeuralStatePtr begin(const Bag* bag) const override;
  NeuralStatePtr advance(const NeuralState& state, TokenId word) const override;
  const std::vector<double>& log_dist(const NeuralState& state) const override;

 private:
  struct State;
  void forward_window(std::span<const TokenId> window, std::vector<double>& concat,
                      std::vector<double>& hidden, std::vector<double>& dist) const;

  std::size_t embed_, hidden_, context_;
};

}  // namespace wo
