#include "wordorder/combine/tune.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "wordorder/core/parallel.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/eval/bleu.hpp"

namespace wo {
namespace {

SurfaceSentence to_surfaces(const TokenSequence& ids, const Vocabulary& vocab) {
  SurfaceSentence surfaces;
  surfaces.reserve(ids.size());
  for (TokenId id : ids) surfaces.push_back(vocab.surface(id));
  return surfaces;
}

template <typename Error>
[[noreturn]] void rethrow_with_index(const Error& e, std::size_t sentence) {
  throw Error("dev sentence " + std::to_string(sentence) + ": " + e.what());
}

// Candidate values for one coordinate: a coarse absolute grid on the first
// pass, then shrinking steps around the incumbent.
std::vector<double> line_candidates(double current, std::size_t pass, double lo, double hi) {
  std::vector<double> values;
  if (pass == 1) {
    values = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0};
  } else {
    const double step = std::max(0.05, 0.5 / static_cast<double>(pass));
    values = {current - 2.0 * step, current - step, current + step, current + 2.0 * step};
  }
  std::vector<double> kept;
  for (double v : values) {
    v = std::clamp(v, lo, hi);
    if (std::fabs(v - current) < 1e-9) continue;
    if (std::none_of(kept.begin(), kept.end(),
                     [&](double u) { return std::fabs(u - v) < 1e-9; })) {
      kept.push_back(v);
    }
  }
  return kept;
}

}  // namespace

double dev_bleu(const LogLinearCombo& combo, const std::vector<TokenSequence>& dev_references,
                const TuneConfig& config) {
  const Vocabulary& vocab = combo.vocab();
  BeamConfig decode = config.decode;
  decode.beam_size = config.beam_size;

  std::vector<SurfaceSentence> hypotheses(dev_references.size());
  std::vector<SurfaceSentence> references(dev_references.size());
  parallel_for(dev_references.size(), config.workers, [&](std::size_t i) {
    const TokenSequence& ref = dev_references[i];
    try {
      const auto finals = beam_search(bag_of_words(ref), combo, decode, config.unigrams);
      hypotheses[i] = to_surfaces(finals.front().prefix, vocab);
    } catch (const UsageError& e) {
      rethrow_with_index(e, i + 1);
    } catch (const DataError& e) {
      rethrow_with_index(e, i + 1);
    } catch (const InternalError& e) {
      rethrow_with_index(e, i + 1);
    }
    references[i] = to_surfaces(ref, vocab);
  });
  return corpus_bleu(hypotheses, references).bleu;
}

TuneResult tune_weights(const std::vector<ScorerPtr>& members,
                        const std::vector<TokenSequence>& dev_references,
                        const TuneConfig& config) {
  if (members.empty()) throw UsageError("tuning needs at least one scorer");
  if (dev_references.empty()) throw DataError("tuning needs at least one dev sentence");
  if (config.budget < 1) throw UsageError("tuning budget must be at least 1 evaluation");
  if (!(config.weight_min >= 0.0) || !(config.weight_min < config.weight_max)) {
    throw UsageError("tuning weight bounds must satisfy 0 <= min < max");
  }

  TuneResult result;
  result.weights.assign(members.size(), 1.0);

  auto evaluate = [&](const std::vector<double>& weights) {
    const double bleu = dev_bleu(LogLinearCombo(members, weights), dev_references, config);
    ++result.evaluations;
    return bleu;
  };

  result.best_bleu = evaluate(result.weights);
  result.trajectory.push_back(result.best_bleu);
  if (members.size() == 1) return result;  // nothing to tune: the scale is fixed

  bool improved = true;
  while (improved && result.evaluations < config.budget) {
    improved = false;
    const std::size_t pass = ++result.iterations;
    for (std::size_t m = 1; m < members.size() && result.evaluations < config.budget; ++m) {
      for (const double value :
           line_candidates(result.weights[m], pass, config.weight_min, config.weight_max)) {
        if (result.evaluations >= config.budget) break;
        std::vector<double> probe = result.weights;
        probe[m] = value;
        const double bleu = evaluate(probe);
        if (bleu > result.best_bleu + 1e-12) {
          result.best_bleu = bleu;
          result.weights = std::move(probe);
          improved = true;
        }
        result.trajectory.push_back(result.best_bleu);
      }
    }
  }
  return result;
}

}  // namespace wo
