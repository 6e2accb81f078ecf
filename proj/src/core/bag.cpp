#include "wordorder/core/bag.hpp"

#include <algorithm>

#include "wordorder/errors.hpp"

namespace wo {

namespace {

auto entry_pos(std::vector<Bag::Entry>& entries, TokenId id) {
  return std::lower_bound(entries.begin(), entries.end(), id,
                          [](const Bag::Entry& e, TokenId v) { return e.id < v; });
}

}  // namespace

Bag::Bag(std::span<const TokenId> sentence) {
  for (TokenId id : sentence) insert(id);
}

std::int32_t Bag::count(TokenId id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Entry& e, TokenId v) { return e.id < v; });
  if (it == entries_.end() || it->id != id) return 0;
  return it->count;
}

void Bag::insert(TokenId id) {
  auto it = entry_pos(entries_, id);
  if (it != entries_.end() && it->id == id) {
    ++it->count;
  } else {
    entries_.insert(it, Entry{id, 1});
  }
  ++size_;
}

void Bag::remove_one(TokenId id) {
  auto it = entry_pos(entries_, id);
  if (it == entries_.end() || it->id != id) {
    throw InternalError("removing a token absent from the bag");
  }
  if (--it->count == 0) entries_.erase(it);
  --size_;
}

std::uint64_t Bag::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const Entry& e : entries_) {
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.id)));
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.count)));
  }
  return h;
}

Bag bag_of_words(std::span<const TokenId> sentence) { return Bag(sentence); }

TokenSequence sorted_bag_sequence(const Bag& bag, const Vocabulary& vocab) {
  std::vector<Bag::Entry> entries = bag.entries();
  std::sort(entries.begin(), entries.end(), [&vocab](const Bag::Entry& a, const Bag::Entry& b) {
    return vocab.surface(a.id) < vocab.surface(b.id);
  });
  TokenSequence out;
  out.reserve(bag.size());
  for (const Bag::Entry& e : entries) {
    for (std::int32_t k = 0; k < e.count; ++k) out.push_back(e.id);
  }
  return out;
}

}  // namespace wo
