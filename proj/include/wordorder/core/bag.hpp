#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wordorder/core/vocabulary.hpp"

namespace wo {

using TokenSequence = std::vector<TokenId>;

// Multiset of token ids. Entries are kept sorted by id with count >= 1, so
// equal multisets compare equal regardless of insertion order.
class Bag {
 public:
  Bag() = default;
  explicit Bag(std::span<const TokenId> sentence);

  std::size_t size() const { return size_; }  // total tokens
  bool empty() const { return size_ == 0; }
  std::size_t distinct() const { return entries_.size(); }

  std::int32_t count(TokenId id) const;
  void insert(TokenId id);
  // Decrements the count; a token reaching 0 is removed. Throws
  // InternalError if the token is absent.
  void remove_one(TokenId id);

  struct Entry {
    TokenId id;
    std::int32_t count;
    bool operator==(const Entry&) const = default;
  };
  const std::vector<Entry>& entries() const { return entries_; }

  bool operator==(const Bag&) const = default;
  std::uint64_t hash() const;

 private:
  std::vector<Entry> entries_;
  std::size_t size_ = 0;
};

Bag bag_of_words(std::span<const TokenId> sentence);

// Canonical presentation of a bag: byte-wise lexicographic ascending on the
// surface forms, duplicates adjacent. Deterministic and locale-independent.
TokenSequence sorted_bag_sequence(const Bag& bag, const Vocabulary& vocab);

}  // namespace wo
