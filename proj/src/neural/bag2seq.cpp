#include "wordorder/neural/bag2seq.hpp"

#include <algorithm>

#include "output_layer.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/kernels.hpp"

namespace wo {

struct Bag2SeqModel::State : NeuralState {
  std::shared_ptr<const std::vector<double>> annotations;  // J x A, shared down the branch
  std::shared_ptr<const std::vector<double>> annot_proj;   // J x S, likewise bag-constant
  std::vector<double> h, c;
  std::vector<double> dist;
};

Bag2SeqModel::Bag2SeqModel(Vocabulary vocab, std::size_t embed, std::size_t hidden,
                           std::size_t attn)
    : NeuralModel(std::move(vocab)), embed_(embed), hidden_(hidden), attn_(attn) {
  if (embed_ == 0 || hidden_ == 0 || attn_ == 0) {
    throw UsageError("bag2seq dimensions must be positive");
  }
  const std::size_t v = vocab_.size();
  params_.add("embedding", {v, embed_});
  params_.add("encoder_w", {attn_, embed_});
  params_.add("encoder_b", {attn_});
  params_.add("init_w", {hidden_, attn_});
  params_.add("init_b", {hidden_});
  params_.add("lstm_wx", {4 * hidden_, embed_ + attn_});
  params_.add("lstm_wh", {4 * hidden_, hidden_});
  params_.add("lstm_b", {4 * hidden_});
  params_.add("att_state_w", {attn_, hidden_});
  params_.add("att_annot_w", {attn_, attn_});
  params_.add("att_v", {attn_});
  params_.add("output_w", {v, hidden_});
  params_.add("output_b", {v});
}

std::vector<std::size_t> Bag2SeqModel::dims() const {
  return {vocab_.size(), embed_, hidden_, attn_};
}

LstmCell Bag2SeqModel::cell() const {
  return LstmCell(params_.at("lstm_wx"), params_.at("lstm_wh"), params_.at("lstm_b"));
}

AttentionParams Bag2SeqModel::attention() const {
  AttentionParams p;
  p.state_w = params_.at("att_state_w").value;
  p.annot_w = params_.at("att_annot_w").value;
  p.v = params_.at("att_v").value;
  p.s_dim = attn_;
  p.h_dim = hidden_;
  p.a_dim = attn_;
  return p;
}

std::vector<double> Bag2SeqModel::encode(const Bag& bag) const {
  if (bag.empty()) throw DataError("bag2seq cannot encode an empty bag");
  const TokenSequence tokens = sorted_bag_sequence(bag, vocab_);
  const Tensor& emb = params_.at("embedding");
  const Tensor& w_enc = params_.at("encoder_w");
  const Tensor& b_enc = params_.at("encoder_b");

  std::vector<double> annotations(tokens.size() * attn_);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    double* a_j = annotations.data() + j * attn_;
    std::copy(b_enc.value.begin(), b_enc.value.end(), a_j);
    kernels::matvec(w_enc.value.data(), emb.row(static_cast<std::size_t>(tokens[j])).data(), a_j,
                    attn_, embed_, true);
    kernels::tanh_vec(a_j, a_j, attn_);
  }
  return annotations;
}

std::vector<double> Bag2SeqModel::initial_hidden(const std::vector<double>& annotations) const {
  const std::size_t J = annotations.size() / attn_;
  std::vector<double> mean(attn_, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    kernels::axpy(1.0 / static_cast<double>(J), annotations.data() + j * attn_, mean.data(),
                  attn_);
  }
  std::vector<double> h0 = params_.at("init_b").value;
  kernels::matvec(params_.at("init_w").value.data(), mean.data(), h0.data(), hidden_, attn_, true);
  kernels::tanh_vec(h0.data(), h0.data(), hidden_);
  return h0;
}

namespace {

// Decoder input is [prev-word embedding; attention context].
void concat_input(std::span<const double> emb_row, std::span<const double> ctx,
                  std::vector<double>& x) {
  x.resize(emb_row.size() + ctx.size());
  std::copy(emb_row.begin(), emb_row.end(), x.begin());
  std::copy(ctx.begin(), ctx.end(), x.begin() + static_cast<std::ptrdiff_t>(emb_row.size()));
}

}  // namespace

double Bag2SeqModel::accumulate_gradients(const TokenSequence& sentence) {
  if (sentence.empty()) throw DataError("bag2seq cannot train on an empty sentence");
  const Bag bag = bag_of_words(sentence);
  const TokenSequence bag_tokens = sorted_bag_sequence(bag, vocab_);
  const std::size_t J = bag_tokens.size();
  const std::vector<double> annotations = encode(bag);

  TokenSequence inputs{vocab_.bos()};
  inputs.insert(inputs.end(), sentence.begin(), sentence.end());
  TokenSequence targets(sentence);
  targets.push_back(vocab_.eos());
  const std::size_t steps = inputs.size();

  Tensor& emb = params_.at("embedding");
  Tensor& w_enc = params_.at("encoder_w");
  Tensor& b_enc = params_.at("encoder_b");
  Tensor& w_init = params_.at("init_w");
  Tensor& b_init = params_.at("init_b");
  Tensor& w_x = params_.at("lstm_wx");
  Tensor& w_h = params_.at("lstm_wh");
  Tensor& b = params_.at("lstm_b");
  Tensor& att_s = params_.at("att_state_w");
  Tensor& att_a = params_.at("att_annot_w");
  Tensor& att_v = params_.at("att_v");
  Tensor& w_o = params_.at("output_w");
  Tensor& b_o = params_.at("output_b");

  const LstmCell lstm = cell();
  const AttentionParams att = attention();

  // Forward, caching everything backprop will revisit.
  std::vector<double> mean(attn_, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    kernels::axpy(1.0 / static_cast<double>(J), annotations.data() + j * attn_, mean.data(),
                  attn_);
  }
  std::vector<double> h0 = b_init.value;
  kernels::matvec(w_init.value.data(), mean.data(), h0.data(), hidden_, attn_, true);
  kernels::tanh_vec(h0.data(), h0.data(), hidden_);

  std::vector<AttentionCache> att_caches(steps);
  std::vector<LstmStepCache> lstm_caches(steps);
  std::vector<std::vector<double>> dists(steps);
  const std::vector<double> annot_proj = attention_project(att, annotations);
  std::vector<double> h = h0, c(hidden_, 0.0), x;
  double loss = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    attention_forward(att, h, annotations, annot_proj, att_caches[t]);
    concat_input(emb.row(static_cast<std::size_t>(inputs[t])), att_caches[t].context, x);
    lstm_forward(lstm, x, h, c, lstm_caches[t]);
    h = lstm_caches[t].h;
    c = lstm_caches[t].c;
    output_log_dist(w_o, b_o, h, dists[t]);
    loss -= dists[t][static_cast<std::size_t>(targets[t])];
  }

  // Backward through time, accumulating annotation gradients across steps.
  std::vector<double> d_annotations(J * attn_, 0.0);
  std::vector<double> d_h(hidden_, 0.0), d_c(hidden_, 0.0);
  std::vector<double> d_x(embed_ + attn_), d_h_prev(hidden_), d_c_prev(hidden_);
  for (std::size_t t = steps; t-- > 0;) {
    output_backward(w_o, b_o, lstm_caches[t].h, dists[t], targets[t], d_h);
    lstm_backward(lstm, w_x, w_h, b, lstm_caches[t], d_h, d_c, d_x, d_h_prev, d_c_prev);
    kernels::add(d_x.data(), emb.grad_row(static_cast<std::size_t>(inputs[t])).data(), embed_);
    // The attention read used the pre-update state, so its state gradient
    // joins the recurrent path into h_{t-1}.
    attention_backward(att, lstm_caches[t].h_prev, annotations, att_caches[t],
                       {d_x.data() + embed_, attn_}, att_s.grad, att_a.grad, att_v.grad, d_h_prev,
                       d_annotations);
    d_h = d_h_prev;
    d_c = d_c_prev;
  }

  // d_h now holds the gradient on h0 = tanh(W_init mean + b_init).
  std::vector<double> d_pre0(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) d_pre0[j] = d_h[j] * (1.0 - h0[j] * h0[j]);
  kernels::rank1_update(1.0, d_pre0.data(), mean.data(), w_init.grad.data(), hidden_, attn_);
  kernels::add(d_pre0.data(), b_init.grad.data(), hidden_);
  std::vector<double> d_mean(attn_, 0.0);
  kernels::matvec_t(w_init.value.data(), d_pre0.data(), d_mean.data(), hidden_, attn_);
  for (std::size_t j = 0; j < J; ++j) {
    kernels::axpy(1.0 / static_cast<double>(J), d_mean.data(), d_annotations.data() + j * attn_,
                  attn_);
  }

  // Encoder backward: annotations -> embeddings.
  std::vector<double> d_pre(attn_);
  for (std::size_t j = 0; j < J; ++j) {
    const double* a_j = annotations.data() + j * attn_;
    const double* da_j = d_annotations.data() + j * attn_;
    for (std::size_t r = 0; r < attn_; ++r) d_pre[r] = da_j[r] * (1.0 - a_j[r] * a_j[r]);
    kernels::rank1_update(1.0, d_pre.data(),
                          emb.row(static_cast<std::size_t>(bag_tokens[j])).data(),
                          w_enc.grad.data(), attn_, embed_);
    kernels::add(d_pre.data(), b_enc.grad.data(), attn_);
    kernels::matvec_t(w_enc.value.data(), d_pre.data(),
                      emb.grad_row(static_cast<std::size_t>(bag_tokens[j])).data(), attn_, embed_);
  }
  return loss;
}

double Bag2SeqModel::sentence_loss(const TokenSequence& sentence) const {
  if (sentence.empty()) throw DataError("bag2seq cannot score an empty sentence");
  const Bag bag = bag_of_words(sentence);
  const std::vector<double> annotations = encode(bag);

  TokenSequence inputs{vocab_.bos()};
  inputs.insert(inputs.end(), sentence.begin(), sentence.end());
  TokenSequence targets(sentence);
  targets.push_back(vocab_.eos());

  const Tensor& emb = params_.at("embedding");
  const LstmCell lstm = cell();
  const AttentionParams att = attention();
  AttentionCache att_cache;
  LstmStepCache lstm_cache;
  const std::vector<double> annot_proj = attention_project(att, annotations);
  std::vector<double> h = initial_hidden(annotations), c(hidden_, 0.0), x, dist;
  double loss = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    attention_forward(att, h, annotations, annot_proj, att_cache);
    concat_input(emb.row(static_cast<std::size_t>(inputs[t])), att_cache.context, x);
    lstm_forward(lstm, x, h, c, lstm_cache);
    h = lstm_cache.h;
    c = lstm_cache.c;
    output_log_dist(params_.at("output_w"), params_.at("output_b"), h, dist);
    loss -= dist[static_cast<std::size_t>(targets[t])];
  }
  return loss;
}

NeuralStatePtr Bag2SeqModel::begin(const Bag* bag) const {
  if (bag == nullptr || bag->empty()) {
    throw DataError("bag2seq requires a non-empty bag to start decoding");
  }
  auto annotations = std::make_shared<const std::vector<double>>(encode(*bag));
  auto state = std::make_shared<State>();
  state->annotations = annotations;
  state->annot_proj = std::make_shared<const std::vector<double>>(
      attention_project(attention(), *annotations));

  const std::vector<double> h0 = initial_hidden(*annotations);
  const std::vector<double> c0(hidden_, 0.0);
  AttentionCache att_cache;
  attention_forward(attention(), h0, *annotations, *state->annot_proj, att_cache);
  std::vector<double> x;
  concat_input(params_.at("embedding").row(static_cast<std::size_t>(vocab_.bos())),
               att_cache.context, x);
  LstmStepCache cache;
  lstm_forward(cell(), x, h0, c0, cache);
  state->h = std::move(cache.h);
  state->c = std::move(cache.c);
  output_log_dist(params_.at("output_w"), params_.at("output_b"), state->h, state->dist);
  return state;
}

NeuralStatePtr Bag2SeqModel::advance(const NeuralState& state, TokenId word) const {
  const auto& s = dynamic_cast<const State&>(state);
  auto next = std::make_shared<State>();
  next->annotations = s.annotations;
  next->annot_proj = s.annot_proj;

  AttentionCache att_cache;
  attention_forward(attention(), s.h, *s.annotations, *s.annot_proj, att_cache);
  std::vector<double> x;
  concat_input(params_.at("embedding").row(static_cast<std::size_t>(word)), att_cache.context, x);
  LstmStepCache cache;
  lstm_forward(cell(), x, s.h, s.c, cache);
  next->h = std::move(cache.h);
  next->c = std::move(cache.c);
  output_log_dist(params_.at("output_w"), params_.at("output_b"), next->h, next->dist);
  return next;
}

const std::vector<double>& Bag2SeqModel::log_dist(const NeuralState& state) const {
  return dynamic_cast<const State&>(state).dist;
}

}  // namespace wo
