#include "wordorder/ngram/arpa.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "wordorder/errors.hpp"

namespace wo {
namespace {

std::vector<TokenId> unpack_key(const std::string& key) {
  std::vector<TokenId> ids(key.size() / sizeof(TokenId));
  std::memcpy(ids.data(), key.data(), key.size());
  return ids;
}

std::string surfaces_of(const std::string& key, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : unpack_key(key)) {
    if (!out.empty()) out.push_back(' ');
    out += vocab.surface(id);
  }
  return out;
}

void format_log10(std::ostringstream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.13g", v);
  os << buf;
}

}  // namespace

std::string export_arpa_text(const NgramModel& model, const Vocabulary& vocab) {
  std::ostringstream os;
  os << "\\data\\\n";
  for (int k = 1; k <= model.order(); ++k) {
    os << "ngram " << k << "=" << model.entry_count(k) << "\n";
  }
  for (int k = 1; k <= model.order(); ++k) {
    os << "\n\\" << k << "-grams:\n";
    std::vector<std::pair<std::string, const NgramModel::Entry*>> rows;
    rows.reserve(model.table(k).size());
    for (const auto& [key, entry] : model.table(k)) {
      rows.emplace_back(surfaces_of(key, vocab), &entry);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [surfaces, entry] : rows) {
      format_log10(os, entry->log10p);
      os << '\t' << surfaces;
      if (entry->has_bow) {
        os << '\t';
        format_log10(os, entry->log10bow);
      }
      os << '\n';
    }
  }
  os << "\n\\end\\\n";
  return os.str();
}

void export_arpa(const NgramModel& model, const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << export_arpa_text(model, vocab);
  if (!out) throw DataError("failed while writing '" + path + "'");
}

namespace {

struct ArpaParser {
  const Vocabulary& vocab;
  std::istream& in;
  const std::string& name;
  std::size_t line_no = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(name + ":" + std::to_string(line_no) + ": " + what);
  }

  bool next_line(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  }

  double parse_log10(const std::string& field) const {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail("malformed log10 value '" + field + "'");
    return v;
  }

  NgramModel run() {
    std::string line;
    // Header.
    while (next_line(line)) {
      if (line == "\\data\\") break;
    }
    if (in.eof()) fail("missing \\data\\ header");
    std::vector<std::size_t> declared;
    while (next_line(line)) {
      if (line.empty()) break;
      std::size_t eq = line.find('=');
      if (line.rfind("ngram ", 0) != 0 || eq == std::string::npos) fail("malformed count line");
      const int k = std::stoi(line.substr(6, eq - 6));
      if (k != static_cast<int>(declared.size()) + 1) fail("non-contiguous n-gram orders");
      declared.push_back(static_cast<std::size_t>(std::stoull(line.substr(eq + 1))));
    }
    if (declared.empty()) fail("header declares no n-gram orders");

    const int order = static_cast<int>(declared.size());
    NgramModelWriter writer(order, vocab);

    int section = 0;  // current order being read; 0 = between sections
    while (next_line(line)) {
      if (line.empty()) continue;
      if (line == "\\end\\") {
        for (std::size_t k = 0; k < declared.size(); ++k) {
          if (writer.table(static_cast<int>(k + 1)).size() != declared[k]) {
            fail("order " + std::to_string(k + 1) + " declares " + std::to_string(declared[k]) +
                 " entries but contains " +
                 std::to_string(writer.table(static_cast<int>(k + 1)).size()));
          }
        }
        return writer.take();
      }
      if (line.front() == '\\') {
        const std::size_t dash = line.find("-grams:");
        if (dash == std::string::npos) fail("unexpected section marker '" + line + "'");
        section = std::stoi(line.substr(1, dash - 1));
        if (section < 1 || section > order) fail("section order out of range");
        continue;
      }
      if (section == 0) fail("entry outside any n-gram section");

      std::vector<std::string> fields;
      std::size_t start = 0;
      while (start <= line.size()) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
          fields.push_back(line.substr(start));
          break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
      }
      if (fields.size() != 2 && fields.size() != 3) fail("expected 2 or 3 tab-separated fields");

      NgramModel::Entry entry;
      entry.log10p = parse_log10(fields[0]);
      if (fields.size() == 3) {
        entry.has_bow = true;
        entry.log10bow = parse_log10(fields[2]);
      }
      std::istringstream words(fields[1]);
      std::string w;
      TokenSequence ids;
      while (words >> w) {
        std::optional<TokenId> id = vocab.id_of(w);
        if (!id) fail("surface '" + w + "' is not in the vocabulary");
        ids.push_back(*id);
      }
      if (static_cast<int>(ids.size()) != section) fail("gram length does not match its section");
      if (entry.has_bow && section == order) fail("top-order entry carries a back-off weight");
      auto [it, inserted] = writer.table(section).emplace(NgramModel::key_of(ids), entry);
      if (!inserted) fail("duplicate entry '" + fields[1] + "'");
    }
    fail("missing \\end\\ marker");
  }
};

}  // namespace

NgramModel import_arpa_text(const std::string& text, const Vocabulary& vocab) {
  std::istringstream in(text);
  static const std::string name = "<string>";
  ArpaParser parser{vocab, in, name};
  return parser.run();
}

NgramModel import_arpa(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  ArpaParser parser{vocab, in, path};
  return parser.run();
}

}  // namespace wo
