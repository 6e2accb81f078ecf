#include "wordorder/core/corpus.hpp"

#include <fstream>
#include <sstream>

#include "wordorder/errors.hpp"

namespace wo {

namespace {

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = s[i];
    std::size_t len;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    // Reject overlong two-byte forms; longer overlongs are rare enough that a
    // whitespace tokenizer never meets them in practice.
    if (len == 2 && (c & 0x1E) == 0) return false;
    i += len;
  }
  return true;
}

template <typename PerLine>
void for_each_line(const std::string& path, PerLine&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!valid_utf8(line)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": invalid UTF-8");
    }
    fn(line);
  }
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(std::move(tok));
  return out;
}

}  // namespace

std::vector<TokenSequence> load_corpus(const std::string& path, const Vocabulary& vocab) {
  std::vector<TokenSequence> corpus;
  for_each_line(path, [&](const std::string& line) {
    TokenSequence seq;
    for (const auto& tok : split_ws(line)) seq.push_back(vocab.id_or_unk(tok));
    corpus.push_back(std::move(seq));
  });
  return corpus;
}

std::vector<std::vector<std::string>> load_surface_corpus(const std::string& path) {
  std::vector<std::vector<std::string>> corpus;
  for_each_line(path, [&](const std::string& line) { corpus.push_back(split_ws(line)); });
  return corpus;
}

std::unordered_map<std::string, std::uint64_t> count_surfaces(
    const std::vector<std::vector<std::string>>& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::size_t tokens = 0;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      ++counts[tok];
      ++tokens;
    }
  }
  if (tokens == 0) throw DataError("empty corpus: no tokens to build a vocabulary from");
  return counts;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                       std::size_t max_size, bool two_unks) {
  auto counts = count_surfaces(corpus);
  counts.erase(Vocabulary::kBos);
  counts.erase(Vocabulary::kEos);
  counts.erase(Vocabulary::kUnk);
  counts.erase(Vocabulary::kUnk2);
  return Vocabulary::build(counts, max_size, two_unks);
}

std::string join_surfaces(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += vocab.surface(ids[i]);
  }
  return out;
}

}  // namespace wo
