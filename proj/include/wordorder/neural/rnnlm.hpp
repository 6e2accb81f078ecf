#pragma once

#include "wordorder/neural/lstm.hpp"
#include "wordorder/neural/model.hpp"

namespace wo {

// Single-layer LSTM language model: embeddings feed the cell, the hidden
// state projects to a full softmax over the vocabulary.
class RnnLmModel : public NeuralModel {
 public:
  RnnLmModel(Vocabulary vocab, std::size_t embed, std::size_t hidden);

  std::string arch() const override { return "rnnlm"; }
  std::vector<std::size_t> dims() const override;

  double accumulate_gradients(const TokenSequence& sentence) override;
  double sentence_loss(const TokenSequence& sentence) const override;

  NeuralStatePtr begin(const Bag* bag) const override;
  NeuralStatePtr advance(const NeuralState& state, TokenId word) const override;
  const std::vector<double>& log_dist(const NeuralState& state) const override;

 private:
  struct State;
  LstmCell cell() const;

  std::size_t embed_, hidden_;
};

}  // namespace wo
