#pragma once

#include <cstddef>
#include <vector>

#include "wordorder/combine/loglinear.hpp"
#include "wordorder/search/beam.hpp"

namespace wo {

// Derivative-free tuning of combination weights against dev-set BLEU: only
// full decode-and-score evaluations, no gradients. The first weight is pinned
// at 1 (positive rescaling never changes a ranking), the rest live in
// [weight_min, weight_max], and the search is a bounded coordinate line
// search: a coarse grid per coordinate on the first pass, shrinking local
// steps afterwards, always keeping the best incumbent.
struct TuneConfig {
  std::size_t budget = 100;   // max dev BLEU evaluations
  std::size_t beam_size = 5;  // reduced beam during tuning decodes
  BeamConfig decode;          // remaining decoder settings
  double weight_min = 0.0;
  double weight_max = 10.0;
  const UnigramTable* unigrams = nullptr;  // required only in future-cost mode
  std::size_t workers = 1;                 // dev decodes fan out across sentences
};

struct TuneResult {
  std::vector<double> weights;     // one per member, weights[0] == 1
  double best_bleu = 0.0;          // dev BLEU of `weights` under the tuning beam
  std::vector<double> trajectory;  // incumbent-best BLEU after each evaluation
  std::size_t iterations = 0;      // completed coordinate passes
  std::size_t evaluations = 0;
};

// Tunes over the dev references; each reference's bag is its own decoding
// input, so the dev set doubles as both task input and BLEU reference. A
// decode failure on a dev sentence propagates with that sentence's 1-based
// index.
TuneResult tune_weights(const std::vector<ScorerPtr>& members,
                        const std::vector<TokenSequence>& dev_references,
                        const TuneConfig& config = {});

// One tuning-style evaluation: decode every reference's bag with the combo
// and score corpus BLEU against the references. Shared by tuning and the
// tune/eval CLI paths.
double dev_bleu(const LogLinearCombo& combo, const std::vector<TokenSequence>& dev_references,
                const TuneConfig& config);

}  // namespace wo
