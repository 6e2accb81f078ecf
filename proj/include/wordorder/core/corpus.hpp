#pragma once

#include <string>
#include <vector>

#include "wordorder/core/bag.hpp"
#include "wordorder/core/vocabulary.hpp"

namespace wo {

// Whitespace-tokenized UTF-8 text, one sentence per line. OOV surfaces map to
// the unknown id; line order is preserved. Throws DataError (with the line
// number) on unreadable files or invalid UTF-8.
std::vector<TokenSequence> load_corpus(const std::string& path, const Vocabulary& vocab);

// Raw surface-form lines, same validation, no vocabulary mapping.
std::vector<std::vector<std::string>> load_surface_corpus(const std::string& path);

// Surface-form frequency counting for build_vocab. Throws DataError on an
// empty corpus.
std::unordered_map<std::string, std::uint64_t> count_surfaces(
    const std::vector<std::vector<std::string>>& corpus);

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                       std::size_t max_size, bool two_unks = false);

std::string join_surfaces(std::span<const TokenId> ids, const Vocabulary& vocab);

}  // namespace wo
