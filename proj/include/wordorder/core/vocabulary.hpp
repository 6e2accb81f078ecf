#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace wo {

using TokenId = std::int32_t;

// Token <-> dense id bijection with reserved sentinels. Ids are dense in
// [0, size()); reserved tokens occupy the lowest ids. Immutable once built.
class Vocabulary {
 public:
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";
  // Second unknown used by the shared PTB preprocessing. Present only in
  // two-unk mode; treated as an ordinary vocabulary item everywhere else.
  static constexpr const char* kUnk2 = "<unk2>";

  // Builds from surface forms ordered by id. Reserved tokens must already be
  // at the front (factory helpers below guarantee this). Throws DataError on
  // duplicate surfaces.
  static Vocabulary from_tokens(std::vector<std::string> tokens, bool two_unks);

  // Keeps the max_size most frequent surface forms plus the reserved tokens.
  // Frequency ties break lexicographically. `counts` must not contain the
  // reserved surfaces. max_size counts non-reserved entries.
  static Vocabulary build(const std::unordered_map<std::string, std::uint64_t>& counts,
                          std::size_t max_size, bool two_unks);

  // One surface per line, line number = id. Reserved tokens listed first.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t size() const { return tokens_.size(); }
  const std::string& surface(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> id_of(const std::string& surface) const;
  // OOV surfaces map to the unknown id.
  TokenId id_or_unk(const std::string& surface) const;
  bool contains(const std::string& surface) const { return id_of(surface).has_value(); }

  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  TokenId unk() const { return unk_; }
  bool two_unks() const { return unk2_ >= 0; }
  TokenId unk2() const { return unk2_; }
  bool is_reserved(TokenId id) const { return id < reserved_count_; }

  // FNV-1a over all surfaces; used to refuse mixing scorers whose id spaces
  // differ.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  TokenId bos_ = -1, eos_ = -1, unk_ = -1, unk2_ = -1;
  TokenId reserved_count_ = 0;
};

}  // namespace wo
