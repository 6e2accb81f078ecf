#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace wo {

// Corpus-level BLEU over pre-tokenized text: modified n-gram precisions for
// n = 1..4 with reference-count clipping, pooled across sentences, and a
// multiplicative brevity penalty. Precisions are unsmoothed, so any p_n of
// zero pins the score to zero. Reported on the 0-100 scale.
struct BleuReport {
  double bleu = 0.0;
  std::array<double, 4> precisions{};  // p1..p4 in [0, 1]
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  // Tab-separated "BLEU p1 p2 p3 p4 BP hyp_len ref_len" row.
  std::string machine_row() const;
  // Multi-line human-readable report.
  std::string pretty() const;
};

using SurfaceSentence = std::vector<std::string>;

// Hypotheses and references are parallel, line-aligned corpora. Throws
// DataError when the corpora are empty or their lengths differ.
BleuReport corpus_bleu(const std::vector<SurfaceSentence>& hypotheses,
                       const std::vector<SurfaceSentence>& references);

}  // namespace wo
