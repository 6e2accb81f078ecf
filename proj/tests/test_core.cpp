#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "wordorder/core/bag.hpp"
#include "wordorder/core/corpus.hpp"
#include "wordorder/core/vocabulary.hpp"
#include "wordorder/errors.hpp"

using namespace wo;

namespace {

Vocabulary vocab_of(std::initializer_list<const char*> words) {
  std::vector<std::vector<std::string>> corpus;
  for (const char* w : words) corpus.push_back({w});
  return build_vocab(corpus, 1000);
}

TokenSequence ids_of(const Vocabulary& v, std::initializer_list<const char*> words) {
  TokenSequence out;
  for (const char* w : words) out.push_back(v.id_or_unk(w));
  return out;
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("wordorder_core_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::error_code ec; std::filesystem::remove(path, ec); }
};

}  // namespace

TEST_CASE("vocabulary keeps the most frequent types and breaks ties lexicographically") {
  std::unordered_map<std::string, std::uint64_t> counts{
      {"b", 3}, {"a", 3}, {"c", 5}, {"d", 1}};
  Vocabulary v = Vocabulary::build(counts, 3, false);
  REQUIRE(v.size() == 6);  // 3 reserved + 3 kept
  CHECK(v.surface(0) == Vocabulary::kBos);
  CHECK(v.surface(1) == Vocabulary::kEos);
  CHECK(v.surface(2) == Vocabulary::kUnk);
  CHECK(v.surface(3) == "c");
  CHECK(v.surface(4) == "a");  // ties on count fall back to byte order
  CHECK(v.surface(5) == "b");
  CHECK(!v.contains("d"));
  CHECK(v.id_or_unk("d") == v.unk());
}

TEST_CASE("vocabulary smaller than capacity keeps everything") {
  std::unordered_map<std::string, std::uint64_t> counts{{"x", 1}, {"y", 2}};
  Vocabulary v = Vocabulary::build(counts, 100, false);
  CHECK(v.size() == 5);
  CHECK(v.contains("x"));
  CHECK(v.contains("y"));
}

TEST_CASE("two-unk mode reserves a fourth sentinel") {
  Vocabulary v = Vocabulary::build({{"w", 1}}, 10, true);
  CHECK(v.two_unks());
  CHECK(v.surface(3) == Vocabulary::kUnk2);
  CHECK(v.is_reserved(v.unk2()));
  CHECK(!v.is_reserved(*v.id_of("w")));
}

TEST_CASE("vocabulary save/load round trip preserves ids and hash") {
  Vocabulary v = vocab_of({"cat", "the", "sat"});
  TempFile f("");
  v.save(f.path.string());
  Vocabulary w = Vocabulary::load(f.path.string());
  REQUIRE(w.size() == v.size());
  for (TokenId id = 0; id < static_cast<TokenId>(v.size()); ++id) {
    CHECK(w.surface(id) == v.surface(id));
  }
  CHECK(w.hash() == v.hash());
  CHECK(w.bos() == v.bos());
  CHECK(w.eos() == v.eos());
}

TEST_CASE("duplicate surfaces are rejected") {
  CHECK_THROWS_AS(
      Vocabulary::from_tokens({Vocabulary::kBos, Vocabulary::kEos, Vocabulary::kUnk, "a", "a"},
                              false),
      DataError);
}

TEST_CASE("vocabularies differing in content have different hashes") {
  Vocabulary a = vocab_of({"cat", "dog"});
  Vocabulary b = vocab_of({"cat", "dot"});
  CHECK(a.hash() != b.hash());
}

TEST_CASE("bag equality ignores insertion order") {
  Bag a, b;
  for (TokenId id : {5, 3, 5, 9}) a.insert(id);
  for (TokenId id : {9, 5, 3, 5}) b.insert(id);
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  CHECK(a.size() == 4);
  CHECK(a.distinct() == 3);
  CHECK(a.count(5) == 2);
  CHECK(a.count(42) == 0);
}

TEST_CASE("bag insert/remove round-trips and empties cleanly") {
  TokenSequence sent = {7, 7, 2, 7, 4};
  Bag bag(sent);
  CHECK(bag.size() == 5);
  Bag copy = bag;
  for (TokenId id : sent) copy.remove_one(id);
  CHECK(copy.empty());
  CHECK(copy.distinct() == 0);
  CHECK(copy == Bag());
  // The original is untouched, and re-inserting reproduces it.
  for (TokenId id : sent) copy.insert(id);
  CHECK(copy == bag);
}

TEST_CASE("removing an absent token is an internal error") {
  Bag bag;
  bag.insert(1);
  CHECK_THROWS_AS(bag.remove_one(2), InternalError);
  bag.remove_one(1);
  CHECK_THROWS_AS(bag.remove_one(1), InternalError);
}

TEST_CASE("sorted bag sequence is byte-ordered with duplicates adjacent") {
  Vocabulary v = vocab_of({"the", "cat", "sat"});
  Bag bag(ids_of(v, {"the", "cat", "the"}));
  CHECK(join_surfaces(sorted_bag_sequence(bag, v), v) == "cat the the");
}

TEST_CASE("sorted bag sequence puts punctuation before letters") {
  Vocabulary v = vocab_of({"we", "'re", "at", "the", "bottom", "of", "heap", "now", "."});
  Bag bag(ids_of(v, {"we", "'re", "at", "the", "bottom", "of", "the", "heap", "now", "."}));
  CHECK(join_surfaces(sorted_bag_sequence(bag, v), v) == "'re . at bottom heap now of the the we");
}

TEST_CASE("corpus loading maps OOV to unk and keeps line order") {
  Vocabulary v = vocab_of({"the", "cat"});
  TempFile f("the cat\nthe dog\n");
  auto corpus = load_corpus(f.path.string(), v);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0] == ids_of(v, {"the", "cat"}));
  CHECK(corpus[1][1] == v.unk());
}

TEST_CASE("corpus loading reports invalid UTF-8 with its line number") {
  Vocabulary v = vocab_of({"ok"});
  TempFile f(std::string("ok\n\xFF\xFE garbage\n"));
  try {
    load_corpus(f.path.string(), v);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("multibyte UTF-8 survives the tokenizer") {
  TempFile f(std::string("caf\xC3\xA9 \xE2\x82\xAC\n"));
  auto corpus = load_surface_corpus(f.path.string());
  REQUIRE(corpus.size() == 1);
  REQUIRE(corpus[0].size() == 2);
  CHECK(corpus[0][0] == "caf\xC3\xA9");
}

TEST_CASE("counting an empty corpus fails loudly") {
  CHECK_THROWS_AS(count_surfaces({}), DataError);
  CHECK_THROWS_AS(count_surfaces({{}, {}}), DataError);
}

TEST_CASE("missing corpus file raises a data error") {
  Vocabulary v = vocab_of({"x"});
  CHECK_THROWS_AS(load_corpus("/nonexistent/path/corpus.txt", v), DataError);
}

TEST_CASE("reserved surfaces in text do not collide with sentinels") {
  // A literal "<unk>" in running text maps to the reserved unk id rather than
  // creating a duplicate type.
  std::vector<std::vector<std::string>> corpus = {{"<unk>", "word", "word"}};
  Vocabulary v = build_vocab(corpus, 10);
  CHECK(v.id_or_unk("<unk>") == v.unk());
  CHECK(v.contains("word"));
  CHECK(v.size() == 4);
}
