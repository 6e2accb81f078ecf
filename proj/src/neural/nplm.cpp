#include "wordorder/neural/nplm.hpp"

#include <algorithm>

#include "output_layer.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/kernels.hpp"

namespace wo {

struct NplmModel::State : NeuralState {
  std::vector<TokenId> window;  // last `context` consumed tokens, oldest first
  std::vector<double> dist;     // conditional for the next position
};

NplmModel::NplmModel(Vocabulary vocab, std::size_t embed, std::size_t hidden, std::size_t context)
    : NeuralModel(std::move(vocab)), embed_(embed), hidden_(hidden), context_(context) {
  if (embed_ == 0 || hidden_ == 0 || context_ == 0) {
    throw UsageError("nplm dimensions must be positive");
  }
  const std::size_t v = vocab_.size();
  params_.add("embedding", {v, embed_});
  params_.add("hidden_w", {hidden_, context_ * embed_});
  params_.add("hidden_b", {hidden_});
  params_.add("output_w", {v, hidden_});
  params_.add("output_b", {v});
}

std::vector<std::size_t> NplmModel::dims() const {
  return {vocab_.size(), embed_, hidden_, context_};
}

void NplmModel::forward_window(std::span<const TokenId> window, std::vector<double>& concat,
                               std::vector<double>& hidden, std::vector<double>& dist) const {
  const Tensor& emb = params_.at("embedding");
  concat.resize(context_ * embed_);
  for (std::size_t j = 0; j < context_; ++j) {
    const auto row = emb.row(static_cast<std::size_t>(window[j]));
    std::copy(row.begin(), row.end(), concat.begin() + j * embed_);
  }
  const Tensor& w_h = params_.at("hidden_w");
  hidden = params_.at("hidden_b").value;
  kernels::matvec(w_h.value.data(), concat.data(), hidden.data(), hidden_, context_ * embed_, true);
  kernels::tanh_vec(hidden.data(), hidden.data(), hidden_);
  output_log_dist(params_.at("output_w"), params_.at("output_b"), hidden, dist);
}

double NplmModel::accumulate_gradients(const TokenSequence& sentence) {
  TokenSequence padded(context_, vocab_.bos());
  padded.insert(padded.end(), sentence.begin(), sentence.end());
  padded.push_back(vocab_.eos());

  Tensor& emb = params_.at("embedding");
  Tensor& w_h = params_.at("hidden_w");
  Tensor& b_h = params_.at("hidden_b");
  Tensor& w_o = params_.at("output_w");
  Tensor& b_o = params_.at("output_b");

  double loss = 0.0;
  std::vector<double> concat, hidden, dist;
  std::vector<double> d_hidden(hidden_), d_concat(context_ * embed_);
  for (std::size_t t = context_; t < padded.size(); ++t) {
    const std::span<const TokenId> window(padded.data() + t - context_, context_);
    forward_window(window, concat, hidden, dist);

    std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
    loss += output_backward(w_o, b_o, hidden, dist, padded[t], d_hidden);

    // Through the tanh hidden layer down to the embedding concat.
    for (std::size_t j = 0; j < hidden_; ++j) d_hidden[j] *= 1.0 - hidden[j] * hidden[j];
    kernels::rank1_update(1.0, d_hidden.data(), concat.data(), w_h.grad.data(), hidden_,
                          context_ * embed_);
    kernels::add(d_hidden.data(), b_h.grad.data(), hidden_);
    std::fill(d_concat.begin(), d_concat.end(), 0.0);
    kernels::matvec_t(w_h.value.data(), d_hidden.data(), d_concat.data(), hidden_,
                      context_ * embed_);
    for (std::size_t j = 0; j < context_; ++j) {
      kernels::add(d_concat.data() + j * embed_,
                   emb.grad_row(static_cast<std::size_t>(window[j])).data(), embed_);
    }
  }
  return loss;
}

double NplmModel::sentence_loss(const TokenSequence& sentence) const {
  TokenSequence padded(context_, vocab_.bos());
  padded.insert(padded.end(), sentence.begin(), sentence.end());
  padded.push_back(vocab_.eos());
  double loss = 0.0;
  std::vector<double> concat, hidden, dist;
  for (std::size_t t = context_; t < padded.size(); ++t) {
    forward_window({padded.data() + t - context_, context_}, concat, hidden, dist);
    loss -= dist[static_cast<std::size_t>(padded[t])];
  }
  return loss;
}

NeuralStatePtr NplmModel::begin(const Bag*) const {
  auto state = std::make_shared<State>();
  state->window.assign(context_, vocab_.bos());
  std::vector<double> concat, hidden;
  forward_window(state->window, concat, hidden, state->dist);
  return state;
}

NeuralStatePtr NplmModel::advance(const NeuralState& state, TokenId word) const {
  const auto& s = dynamic_cast<const State&>(state);
  auto next = std::make_shared<State>();
  next->window.assign(s.window.begin() + 1, s.window.end());
  next->window.push_back(word);
  std::vector<double> concat, hidden;
  forward_window(next->window, concat, hidden, next->dist);
  return next;
}

const std::vector<double>& NplmModel::log_dist(const NeuralState& state) const {
  return dynamic_cast<const State&>(state).dist;
}

}  // namespace wo
