#include "wordorder/eval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "wordorder/core/parallel.hpp"
#include "wordorder/errors.hpp"

namespace wo {

std::string TimingReport::tsv() const {
  std::ostringstream out;
  out << "label\tbeam\theuristic\tworkers\tseconds\tsentences\ttokens\ttokens_per_sec\tstatus\n";
  for (const TimingRow& row : rows) {
    char seconds[32], rate[32];
    std::snprintf(seconds, sizeof(seconds), "%.6f", row.seconds);
    std::snprintf(rate, sizeof(rate), "%.1f", row.tokens_per_second);
    out << row.label << '\t' << row.beam_size << '\t' << row.heuristic << '\t' << row.workers
        << '\t' << seconds << '\t' << row.sentences << '\t' << row.tokens << '\t' << rate << '\t'
        << (row.ok ? "ok" : "error: " + row.error) << '\n';
  }
  return out.str();
}

TimingReport benchmark_decode(const std::vector<Bag>& bags,
                              const std::vector<BenchEntry>& entries) {
  if (bags.empty()) throw DataError("benchmark needs at least one bag");
  if (entries.empty()) throw UsageError("benchmark needs at least one configuration");
  std::unordered_set<std::string> labels;
  for (const BenchEntry& entry : entries) {
    if (entry.scorer == nullptr) throw UsageError("benchmark entry without a scorer");
    if (!labels.insert(entry.label).second) {
      throw UsageError("duplicate benchmark label: " + entry.label);
    }
  }

  std::size_t tokens = 0;
  for (const Bag& bag : bags) tokens += bag.size();

  TimingReport report;
  for (const BenchEntry& entry : entries) {
    TimingRow row;
    row.label = entry.label;
    row.beam_size = entry.config.beam_size;
    row.heuristic = heuristic_name(entry.config.heuristic);
    row.workers = std::max<std::size_t>(entry.workers, 1);
    row.sentences = bags.size();
    row.tokens = tokens;
    try {
      (void)beam_search(bags.front(), *entry.scorer, entry.config, entry.unigrams);  // warm-up
      const auto start = std::chrono::steady_clock::now();
      parallel_for(bags.size(), row.workers, [&](std::size_t i) {
        (void)beam_search(bags[i], *entry.scorer, entry.config, entry.unigrams);
      });
      const auto stop = std::chrono::steady_clock::now();
      row.seconds = std::chrono::duration<double>(stop - start).count();
      if (row.seconds > 0.0) row.tokens_per_second = static_cast<double>(tokens) / row.seconds;
    } catch (const UsageError& e) {
      row.ok = false;
      row.error = e.what();
    } catch (const DataError& e) {
      row.ok = false;
      row.error = e.what();
    } catch (const InternalError& e) {
      row.ok = false;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace wo
