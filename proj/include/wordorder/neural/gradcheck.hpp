#pragma once

#include <string>
#include <vector>

#include "wordorder/neural/model.hpp"

namespace wo {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;     // tensor holding the worst-matching scalar
  std::size_t worst_index = 0;  // flat index within that tensor
  // Tensors whose analytic gradient was identically zero over the batch; a
  // well-chosen batch leaves this empty.
  std::vector<std::string> untouched_tensors;
};

// Verifies the hand-written backward passes: compares each parameter's
// analytic gradient over `batch` against a central finite difference of the
// summed sentence loss. Parameters are restored on return. Intended for tiny
// configurations (the cost is two full forward passes per scalar).
GradCheckResult gradient_check(NeuralModel& model, const std::vector<TokenSequence>& batch,
                               double step = 1e-4);

}  // namespace wo
