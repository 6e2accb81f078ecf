#include "wordorder/combine/loglinear.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "wordorder/errors.hpp"

namespace wo {

struct LogLinearCombo::State : ScorerState {
  std::vector<ScorerStatePtr> parts;
};

LogLinearCombo::LogLinearCombo(std::vector<ScorerPtr> members, std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
  if (members_.empty()) throw UsageError("log-linear combination needs at least one scorer");
  if (weights_.size() != members_.size()) {
    throw UsageError("log-linear combination needs one weight per scorer (" +
                     std::to_string(members_.size()) + " scorers, " +
                     std::to_string(weights_.size()) + " weights)");
  }
  for (const ScorerPtr& member : members_) {
    if (!member) throw InternalError("log-linear combination constructed with a null scorer");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw UsageError("log-linear weights must be finite");
  }
  const std::uint64_t hash = members_.front()->vocab().hash();
  for (const ScorerPtr& member : members_) {
    if (member->vocab().hash() != hash) {
      throw DataError("combined scorers were built over different vocabularies (" +
                      members_.front()->name() + " vs " + member->name() + ")");
    }
  }
}

std::string LogLinearCombo::name() const {
  std::string name = "combo(";
  for (std::size_t m = 0; m < members_.size(); ++m) {
    if (m > 0) name += '+';
    name += members_[m]->name();
  }
  name += ')';
  return name;
}

ScorerStatePtr LogLinearCombo::init(const Bag* bag) const {
  auto state = std::make_shared<State>();
  state->parts.reserve(members_.size());
  for (const ScorerPtr& member : members_) state->parts.push_back(member->init(bag));
  return state;
}

ScorerStatePtr LogLinearCombo::advance(const ScorerState& state, TokenId word) const {
  const auto& prev = dynamic_cast<const State&>(state);
  auto next = std::make_shared<State>();
  next->parts.reserve(members_.size());
  for (std::size_t m = 0; m < members_.size(); ++m) {
    next->parts.push_back(members_[m]->advance(*prev.parts[m], word));
  }
  return next;
}

void LogLinearCombo::score_candidates(const ScorerState& state, std::span<const TokenId> words,
                                      std::span<double> out) const {
  const auto& combo = dynamic_cast<const State&>(state);
  if (combo.parts.size() != members_.size()) {
    throw InternalError("combined state does not match the combination's members");
  }
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> member_scores(words.size());
  for (std::size_t m = 0; m < members_.size(); ++m) {
    members_[m]->score_candidates(*combo.parts[m], words, member_scores);
    for (std::size_t i = 0; i < words.size(); ++i) out[i] += weights_[m] * member_scores[i];
  }
}

void save_weights(const std::string& path, const std::vector<std::string>& names,
                  const std::vector<double>& weights) {
  if (names.size() != weights.size()) {
    throw InternalError("weights file needs one name per weight");
  }
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  for (std::size_t m = 0; m < names.size(); ++m) {
    char value[32];
    std::snprintf(value, sizeof(value), "%.17g", weights[m]);
    out << names[m] << '\t' << value << '\n';
  }
  if (!out.flush()) throw DataError(path + ": write failed");
}

std::vector<std::pair<std::string, double>> load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open weights file");
  std::vector<std::pair<std::string, double>> weights;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected \"scorer-name<TAB>weight\"");
    }
    const std::string name = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    std::size_t used = 0;
    double weight = 0.0;
    try {
      weight = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty() || !std::isfinite(weight)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad weight \"" + value + "\"");
    }
    weights.emplace_back(name, weight);
  }
  if (weights.empty()) throw DataError(path + ": empty weights file");
  return weights;
}

}  // namespace wo
