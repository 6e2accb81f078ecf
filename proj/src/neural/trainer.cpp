#include "wordorder/neural/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wordorder/errors.hpp"
#include "wordorder/neural/bag2seq.hpp"
#include "wordorder/neural/nplm.hpp"
#include "wordorder/neural/rnnlm.hpp"
#include "wordorder/rng.hpp"

namespace wo {

std::unique_ptr<NeuralModel> make_model(const TrainConfig& config, Vocabulary vocab) {
  if (config.arch == "nplm") {
    return std::make_unique<NplmModel>(std::move(vocab), config.embed, config.hidden,
                                       config.context);
  }
  if (config.arch == "rnnlm") {
    return std::make_unique<RnnLmModel>(std::move(vocab), config.embed, config.hidden);
  }
  if (config.arch == "bag2seq") {
    return std::make_unique<Bag2SeqModel>(std::move(vocab), config.embed, config.hidden,
                                          config.attn);
  }
  throw UsageError("unknown architecture '" + config.arch + "' (expected nplm, rnnlm or bag2seq)");
}

double neural_perplexity(const NeuralModel& model, const std::vector<TokenSequence>& corpus) {
  double loss = 0.0;
  std::size_t predictions = 0;
  for (const TokenSequence& sentence : corpus) {
    loss += model.sentence_loss(sentence);
    predictions += NeuralModel::predictions_in(sentence);
  }
  if (predictions == 0) throw DataError("perplexity over an empty corpus is undefined");
  return std::exp(loss / static_cast<double>(predictions));
}

namespace {

void validate(const TrainConfig& config, std::size_t corpus_size) {
  if (corpus_size == 0) throw DataError("training corpus is empty");
  if (config.epochs == 0) throw UsageError("epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (!(config.clip > 0.0)) throw UsageError("gradient clip must be positive");
  if (!(config.init_range > 0.0)) throw UsageError("init range must be positive");
}

}  // namespace

TrainLog train_model(NeuralModel& model, const std::vector<TokenSequence>& corpus,
                     const std::vector<TokenSequence>* dev, const TrainConfig& config) {
  validate(config, corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].empty()) {
      throw DataError("training sentence " + std::to_string(i + 1) + " is empty");
    }
  }

  // One stream drives initialization and every epoch's sentence order, so a
  // seed pins the whole run.
  Rng rng(config.seed);
  model.params().init_uniform(rng, config.init_range);

  std::vector<TokenSequence> train_set;
  std::vector<TokenSequence> holdout;
  const std::vector<TokenSequence>* train_ptr = &corpus;
  const std::vector<TokenSequence>* dev_ptr = dev;
  if (dev_ptr == nullptr || dev_ptr->empty()) {
    const std::size_t n = corpus.size();
    std::size_t k = static_cast<std::size_t>(std::llround(config.dev_fraction *
                                                          static_cast<double>(n)));
    k = std::max<std::size_t>(k, 1);
    if (k < n) {
      train_set.assign(corpus.begin(), corpus.end() - static_cast<std::ptrdiff_t>(k));
      holdout.assign(corpus.end() - static_cast<std::ptrdiff_t>(k), corpus.end());
      train_ptr = &train_set;
      dev_ptr = &holdout;
    } else {
      dev_ptr = &corpus;  // too small to split: evaluate on the training data
    }
  }

  std::vector<std::size_t> order(train_ptr->size());
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  double lr = config.learning_rate;
  double best_dev = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t predictions = 0;
    const double epoch_lr = lr;
    for (std::size_t idx : order) {
      const TokenSequence& sentence = (*train_ptr)[idx];
      model.params().zero_grads();
      const double loss = model.accumulate_gradients(sentence);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training diverged (non-finite loss) at epoch " << epoch << ", sentence "
            << (idx + 1) << "; lower the learning rate";
        throw DataError(msg.str());
      }
      model.params().clip_grads(config.clip);
      model.params().sgd_step(lr);
      epoch_loss += loss;
      predictions += NeuralModel::predictions_in(sentence);
    }
    if (!model.params().values_finite()) {
      throw DataError("training diverged (non-finite parameters) at epoch " +
                      std::to_string(epoch) + "; lower the learning rate");
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.learning_rate = epoch_lr;
    stats.train_ppl = std::exp(epoch_loss / static_cast<double>(predictions));
    stats.dev_ppl = neural_perplexity(model, *dev_ptr);
    if (!std::isfinite(stats.dev_ppl)) {
      throw DataError("training diverged (non-finite dev perplexity) at epoch " +
                      std::to_string(epoch));
    }
    log.epochs.push_back(stats);

    if (stats.dev_ppl < best_dev) {
      best_dev = stats.dev_ppl;
    } else {
      lr *= 0.5;  // dev perplexity stalled
    }
  }
  return log;
}

std::unique_ptr<NeuralModel> train_neural(const std::vector<TokenSequence>& corpus,
                                          const std::vector<TokenSequence>* dev, Vocabulary vocab,
                                          const TrainConfig& config, TrainLog* log) {
  std::unique_ptr<NeuralModel> model = make_model(config, std::move(vocab));
  TrainLog result = train_model(*model, corpus, dev, config);
  if (log != nullptr) *log = std::move(result);
  return model;
}

}  // namespace wo
