#pragma once

#include <memory>
#include <string>

#include "wordorder/neural/model.hpp"

namespace wo {

// Self-contained binary model container. Layout (all integers little-endian):
//   magic "WONM", u32 version, u32 architecture tag (1 nplm, 2 rnnlm,
//   3 bag2seq), u8 two-unknown flag, u32 dimension count + u64 dimensions
//   (vocabulary size first), u64 vocabulary hash, u64 token count +
//   length-prefixed surfaces in id order, u32 tensor count, then per tensor:
//   length-prefixed name, u32 rank + u64 shape, row-major float32 values in
//   registration order.
void save_model(const NeuralModel& model, const std::string& path);

// Rebuilds the vocabulary and model from the container. Throws DataError on
// unreadable files, bad magic/version/tags, truncation, trailing bytes, or a
// vocabulary hash mismatch.
std::unique_ptr<NeuralModel> load_model(const std::string& path);

}  // namespace wo
