#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wordorder/core/bag.hpp"
#include "wordorder/core/vocabulary.hpp"
#include "wordorder/neural/tensor.hpp"

namespace wo {

// Persistent decoding state: advancing never mutates the original, so beam
// hypotheses can branch freely and states may cross threads.
struct NeuralState {
  virtual ~NeuralState() = default;
};
using NeuralStatePtr = std::shared_ptr<const NeuralState>;

// Common face of the three neural language models. Parameters are doubles;
// training is single-threaded, inference methods are const and pure.
class NeuralModel {
 public:
  virtual ~NeuralModel() = default;

  virtual std::string arch() const = 0;
  // Dimension header for the serialized container, vocabulary size first.
  virtual std::vector<std::size_t> dims() const = 0;

  const Vocabulary& vocab() const { return vocab_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  // One training sentence: forward, backward, gradients accumulated into the
  // parameter set. Returns the summed cross-entropy over the sentence's
  // predictions (each real token plus the final eos).
  virtual double accumulate_gradients(const TokenSequence& sentence) = 0;
  virtual double sentence_loss(const TokenSequence& sentence) const = 0;
  static std::size_t predictions_in(const TokenSequence& s) { return s.size() + 1; }

  // State for the empty prefix: the begin sentinel is already consumed, so
  // log_dist(begin(...)) is the conditional for the first word. bag2seq
  // requires the bag; pure LMs ignore it.
  virtual NeuralStatePtr begin(const Bag* bag) const = 0;
  virtual NeuralStatePtr advance(const NeuralState& state, TokenId word) const = 0;
  // Natural-log distribution over the vocabulary for the next position.
  virtual const std::vector<double>& log_dist(const NeuralState& state) const = 0;

 protected:
  explicit NeuralModel(Vocabulary vocab) : vocab_(std::move(vocab)) {}

  Vocabulary vocab_;
  ParameterSet params_;
};

}  // namespace wo
