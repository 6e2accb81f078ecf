#pragma once

#include <string>

#include "wordorder/core/vocabulary.hpp"
#include "wordorder/ngram/model.hpp"

namespace wo {

// Writes the model in ARPA text form: a \data\ header with per-order entry
// counts, then one section per order with lines
//   <log10 prob>\t<w1 ... wk>[\t<log10 backoff>]
// Entries are sorted by surface form so exports are deterministic.
void export_arpa(const NgramModel& model, const Vocabulary& vocab, const std::string& path);
std::string export_arpa_text(const NgramModel& model, const Vocabulary& vocab);

// Parses an ARPA file back into a model. Validates the header counts against
// the section contents and rejects surfaces missing from the vocabulary.
NgramModel import_arpa(const std::string& path, const Vocabulary& vocab);
NgramModel import_arpa_text(const std::string& text, const Vocabulary& vocab);

}  // namespace wo
