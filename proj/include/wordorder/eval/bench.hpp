#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wordorder/core/bag.hpp"
#include "wordorder/ngram/unigram.hpp"
#include "wordorder/search/beam.hpp"
#include "wordorder/search/scorer.hpp"

namespace wo {

// One benchmark configuration: a labeled scorer set plus decoder settings.
// Labels key the report rows and must be unique.
struct BenchEntry {
  std::string label;
  const Scorer* scorer = nullptr;
  BeamConfig config;
  const UnigramTable* unigrams = nullptr;  // required only in future-cost mode
  // Rows timed with more than one worker are not comparable to single-worker
  // rows; the worker count is part of the emitted row for that reason.
  std::size_t workers = 1;
};

struct TimingRow {
  std::string label;
  std::size_t beam_size = 0;
  std::string heuristic;
  std::size_t workers = 1;
  double seconds = 0.0;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  double tokens_per_second = 0.0;
  bool ok = true;
  std::string error;
};

struct TimingReport {
  std::vector<TimingRow> rows;
  // Plot-ready table: one header line, then one tab-separated row per entry
  // ("label beam heuristic workers seconds sentences tokens tokens_per_sec
  // status").
  std::string tsv() const;
};

// Times constrained decoding of the same bag set under every entry. Each
// entry decodes one untimed warm-up sentence first, so one-off setup cost
// stays out of the measurement. A failing entry is recorded in its row and
// the run continues with the remaining entries.
TimingReport benchmark_decode(const std::vector<Bag>& bags, const std::vector<BenchEntry>& entries);

}  // namespace wo
