#include "wordorder/neural/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "wordorder/errors.hpp"

namespace wo {

namespace {

double batch_loss(const NeuralModel& model, const std::vector<TokenSequence>& batch) {
  double loss = 0.0;
  for (const TokenSequence& sentence : batch) loss += model.sentence_loss(sentence);
  return loss;
}

}  // namespace

GradCheckResult gradient_check(NeuralModel& model, const std::vector<TokenSequence>& batch,
                               double step) {
  if (batch.empty()) throw UsageError("gradient check needs at least one sentence");
  if (!(step > 0.0)) throw UsageError("finite-difference step must be positive");

  model.params().zero_grads();
  for (const TokenSequence& sentence : batch) model.accumulate_gradients(sentence);

  // Snapshot the analytic gradients before the probing passes overwrite state.
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : model.params().tensors()) analytic.push_back(t.grad);

  GradCheckResult result;
  auto& tensors = model.params().tensors();
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    Tensor& tensor = tensors[ti];
    bool touched = false;
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor.value[i];
      tensor.value[i] = saved + step;
      const double loss_plus = batch_loss(model, batch);
      tensor.value[i] = saved - step;
      const double loss_minus = batch_loss(model, batch);
      tensor.value[i] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * step);
      const double exact = analytic[ti][i];
      if (exact != 0.0) touched = true;
      const double scale = std::max({std::fabs(numeric), std::fabs(exact), 1e-6});
      const double rel = std::fabs(numeric - exact) / scale;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = tensor.name;
        result.worst_index = i;
      }
    }
    if (!touched) result.untouched_tensors.push_back(tensor.name);
  }
  return result;
}

}  // namespace wo
