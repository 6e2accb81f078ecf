#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wordorder/core/vocabulary.hpp"
#include "wordorder/neural/model.hpp"

namespace wo {

// Hyperparameters for the SGD trainer. Defaults are desk-scale; the ptb
// preset in the CLI overrides the dimensions.
struct TrainConfig {
  std::string arch = "rnnlm";  // nplm | rnnlm | bag2seq
  std::size_t embed = 16;
  std::size_t hidden = 16;
  std::size_t attn = 16;     // bag2seq annotation width
  std::size_t context = 4;   // nplm window length
  std::size_t epochs = 10;
  double learning_rate = 0.1;
  double clip = 5.0;  // global gradient-norm ceiling
  double init_range = 0.08;
  double dev_fraction = 0.05;  // holdout share when no dev corpus is given
  std::uint64_t seed = 1;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_ppl = 0.0;
  double dev_ppl = 0.0;
  double learning_rate = 0.0;  // rate used during this epoch
};

struct TrainLog {
  std::vector<EpochStats> epochs;
};

// Constructs an uninitialized model of the configured architecture.
std::unique_ptr<NeuralModel> make_model(const TrainConfig& config, Vocabulary vocab);

// Per-token perplexity, predictions being each token plus the final
// end-of-sentence.
double neural_perplexity(const NeuralModel& model, const std::vector<TokenSequence>& corpus);

// Seeds initialization and sentence order from config.seed, then runs plain
// per-sentence SGD with gradient-norm clipping. The learning rate halves
// whenever dev perplexity fails to improve. When `dev` is null or empty, the
// tail `dev_fraction` of the corpus is held out (the corpus itself doubles as
// dev if it is too small to split). Throws DataError on divergence.
TrainLog train_model(NeuralModel& model, const std::vector<TokenSequence>& corpus,
                     const std::vector<TokenSequence>* dev, const TrainConfig& config);

// Factory + training in one step: what the train subcommand runs.
std::unique_ptr<NeuralModel> train_neural(const std::vector<TokenSequence>& corpus,
                                          const std::vector<TokenSequence>* dev, Vocabulary vocab,
                                          const TrainConfig& config, TrainLog* log = nullptr);

}  // namespace wo
