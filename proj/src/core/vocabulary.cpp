#include "wordorder/core/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include "wordorder/errors.hpp"

namespace wo {

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, bool two_unks) {
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.ids_.reserve(v.tokens_.size());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    auto [it, inserted] = v.ids_.emplace(v.tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw DataError("duplicate vocabulary surface form: " + v.tokens_[i]);
    }
  }
  auto require = [&](const char* surf) -> TokenId {
    auto it = v.ids_.find(surf);
    if (it == v.ids_.end()) {
      throw DataError(std::string("vocabulary missing reserved token ") + surf);
    }
    return it->second;
  };
  v.bos_ = require(kBos);
  v.eos_ = require(kEos);
  v.unk_ = require(kUnk);
  v.reserved_count_ = 3;
  if (two_unks) {
    v.unk2_ = require(kUnk2);
    v.reserved_count_ = 4;
  }
  return v;
}

Vocabulary Vocabulary::build(const std::unordered_map<std::string, std::uint64_t>& counts,
                             std::size_t max_size, bool two_unks) {
  std::vector<std::string> reserved = {kBos, kEos, kUnk};
  if (two_unks) reserved.push_back(kUnk2);
  if (max_size == 0) {
    throw UsageError("vocabulary size must leave room beyond the reserved tokens");
  }

  std::vector<std::pair<std::string, std::uint64_t>> by_freq(counts.begin(), counts.end());
  std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (by_freq.size() > max_size) by_freq.resize(max_size);

  std::vector<std::string> tokens = std::move(reserved);
  tokens.reserve(tokens.size() + by_freq.size());
  for (auto& [surface, _] : by_freq) tokens.push_back(surface);
  return from_tokens(std::move(tokens), two_unks);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  const bool two = tokens.size() > 3 && tokens[3] == kUnk2;
  return from_tokens(std::move(tokens), two);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw DataError("short write to vocabulary file: " + path);
}

std::optional<TokenId> Vocabulary::id_of(const std::string& surface) const {
  auto it = ids_.find(surface);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id_or_unk(const std::string& surface) const {
  auto it = ids_.find(surface);
  return it == ids_.end() ? unk_ : it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

}  // namespace wo
