#pragma once

#include "wordorder/neural/attention.hpp"
#include "wordorder/neural/lstm.hpp"
#include "wordorder/neural/model.hpp"

namespace wo {

// Bag-conditioned sequence model: an order-invariant encoder turns each bag
// token (with multiplicity, in canonical sorted order) into an annotation
// vector; an LSTM decoder with additive attention over the annotations emits
// the sentence. One embedding matrix serves encoder tokens and decoder
// previous-word inputs.
class Bag2SeqModel : public NeuralModel {
 public:
  // `attn` is both the annotation width and the attention energy width.
  Bag2SeqModel(Vocabulary vocab, std::size_t embed, std::size_t hidden, std::size_t attn);

  std::string arch() const override { return "bag2seq"; }
  std::vector<std::size_t> dims() const override;

  double accumulate_gradients(const TokenSequence& sentence) override;
  double sentence_loss(const TokenSequence& sentence) const override;

  // Requires a non-empty bag; annotations are computed once and shared by
  // every state descended from this one.
  NeuralStatePtr begin(const Bag* bag) const override;
  NeuralStatePtr advance(const NeuralState& state, TokenId word) const override;
  const std::vector<double>& log_dist(const NeuralState& state) const override;

  // Annotation block (J x A) for a bag in canonical order; exposed for the
  // order-invariance and attention tests.
  std::vector<double> encode(const Bag& bag) const;

 private:
  struct State;
  LstmCell cell() const;
  AttentionParams attention() const;
  std::vector<double> initial_hidden(const std::vector<double>& annotations) const;

  std::size_t embed_, hidden_, attn_;
};

}  // namespace wo
