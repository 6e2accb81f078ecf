#include "wordorder/neural/rnnlm.hpp"

#include <algorithm>

#include "output_layer.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/kernels.hpp"

namespace wo {

struct RnnLmModel::State : NeuralState {
  std::vector<double> h, c;
  std::vector<double> dist;
};

RnnLmModel::RnnLmModel(Vocabulary vocab, std::size_t embed, std::size_t hidden)
    : NeuralModel(std::move(vocab)), embed_(embed), hidden_(hidden) {
  if (embed_ == 0 || hidden_ == 0) throw UsageError("rnnlm dimensions must be positive");
  const std::size_t v = vocab_.size();
  params_.add("embedding", {v, embed_});
  params_.add("lstm_wx", {4 * hidden_, embed_});
  params_.add("lstm_wh", {4 * hidden_, hidden_});
  params_.add("lstm_b", {4 * hidden_});
  params_.add("output_w", {v, hidden_});
  params_.add("output_b", {v});
}

std::vector<std::size_t> RnnLmModel::dims() const { return {vocab_.size(), embed_, hidden_}; }

LstmCell RnnLmModel::cell() const {
  return LstmCell(params_.at("lstm_wx"), params_.at("lstm_wh"), params_.at("lstm_b"));
}

double RnnLmModel::accumulate_gradients(const TokenSequence& sentence) {
  TokenSequence inputs{vocab_.bos()};
  inputs.insert(inputs.end(), sentence.begin(), sentence.end());
  TokenSequence targets(sentence);
  targets.push_back(vocab_.eos());
  const std::size_t steps = inputs.size();

  Tensor& emb = params_.at("embedding");
  Tensor& w_x = params_.at("lstm_wx");
  Tensor& w_h = params_.at("lstm_wh");
  Tensor& b = params_.at("lstm_b");
  Tensor& w_o = params_.at("output_w");
  Tensor& b_o = params_.at("output_b");
  const LstmCell lstm = cell();

  std::vector<LstmStepCache> caches(steps);
  std::vector<std::vector<double>> dists(steps);
  std::vector<double> h(hidden_, 0.0), c(hidden_, 0.0);
  double loss = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    lstm_forward(lstm, emb.row(static_cast<std::size_t>(inputs[t])), h, c, caches[t]);
    h = caches[t].h;
    c = caches[t].c;
    output_log_dist(w_o, b_o, h, dists[t]);
    loss -= dists[t][static_cast<std::size_t>(targets[t])];
  }

  std::vector<double> d_h(hidden_, 0.0), d_c(hidden_, 0.0);
  std::vector<double> d_x(embed_), d_h_prev(hidden_), d_c_prev(hidden_);
  for (std::size_t t = steps; t-- > 0;) {
    output_backward(w_o, b_o, caches[t].h, dists[t], targets[t], d_h);
    lstm_backward(lstm, w_x, w_h, b, caches[t], d_h, d_c, d_x, d_h_prev, d_c_prev);
    kernels::add(d_x.data(), emb.grad_row(static_cast<std::size_t>(inputs[t])).data(), embed_);
    d_h = d_h_prev;
    d_c = d_c_prev;
  }
  return loss;
}

double RnnLmModel::sentence_loss(const TokenSequence& sentence) const {
  TokenSequence inputs{vocab_.bos()};
  inputs.insert(inputs.end(), sentence.begin(), sentence.end());
  TokenSequence targets(sentence);
  targets.push_back(vocab_.eos());

  const Tensor& emb = params_.at("embedding");
  const LstmCell lstm = cell();
  LstmStepCache cache;
  std::vector<double> h(hidden_, 0.0), c(hidden_, 0.0), dist;
  double loss = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    lstm_forward(lstm, emb.row(static_cast<std::size_t>(inputs[t])), h, c, cache);
    h = cache.h;
    c = cache.c;
    output_log_dist(params_.at("output_w"), params_.at("output_b"), h, dist);
    loss -= dist[static_cast<std::size_t>(targets[t])];
  }
  return loss;
}

NeuralStatePtr RnnLmModel::begin(const Bag*) const {
  const std::vector<double> zeros(hidden_, 0.0);
  auto state = std::make_shared<State>();
  LstmStepCache cache;
  lstm_forward(cell(), params_.at("embedding").row(static_cast<std::size_t>(vocab_.bos())), zeros,
               zeros, cache);
  state->h = std::move(cache.h);
  state->c = std::move(cache.c);
  output_log_dist(params_.at("output_w"), params_.at("output_b"), state->h, state->dist);
  return state;
}

NeuralStatePtr RnnLmModel::advance(const NeuralState& state, TokenId word) const {
  const auto& s = dynamic_cast<const State&>(state);
  auto next = std::make_shared<State>();
  LstmStepCache cache;
  lstm_forward(cell(), params_.at("embedding").row(static_cast<std::size_t>(word)), s.h, s.c,
               cache);
  next->h = std::move(cache.h);
  next->c = std::move(cache.c);
  output_log_dist(params_.at("output_w"), params_.at("output_b"), next->h, next->dist);
  return next;
}

const std::vector<double>& RnnLmModel::log_dist(const NeuralState& state) const {
  return dynamic_cast<const State&>(state).dist;
}

}  // namespace wo
