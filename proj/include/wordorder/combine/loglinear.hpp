#pragma once

#include <string>
#include <vector>

#include "wordorder/search/scorer.hpp"

namespace wo {

// Weighted log-linear combination of scorers: the combined candidate score is
// sum_m lambda_m * log P_m(word | state_m), with per-member states advanced
// independently and no renormalization — the decoder only needs relative
// scores, and positive scaling of all weights leaves every ranking unchanged.
// The combination is itself a Scorer, so it drops into beam search (and its
// probability-domain estimates) unchanged.
class LogLinearCombo final : public Scorer {
 public:
  // Requires at least one member, one finite weight per member, and members
  // built over the same vocabulary (checked by vocabulary hash).
  LogLinearCombo(std::vector<ScorerPtr> members, std::vector<double> weights);

  std::string name() const override;
  const Vocabulary& vocab() const override { return members_.front()->vocab(); }
  ScorerStatePtr init(const Bag* bag) const override;
  ScorerStatePtr advance(const ScorerState& state, TokenId word) const override;
  void score_candidates(const ScorerState& state, std::span<const TokenId> words,
                        std::span<double> out) const override;

  const std::vector<ScorerPtr>& members() const { return members_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  struct State;
  std::vector<ScorerPtr> members_;
  std::vector<double> weights_;
};

// Weights file: one "scorer-name<TAB>lambda" line per member.
void save_weights(const std::string& path, const std::vector<std::string>& names,
                  const std::vector<double>& weights);
std::vector<std::pair<std::string, double>> load_weights(const std::string& path);

}  // namespace wo
