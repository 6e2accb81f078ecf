#include "wordorder/eval/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <unordered_map>

#include "wordorder/errors.hpp"

namespace wo {
namespace {

constexpr std::size_t kMaxOrder = 4;

// n-grams are keyed by joining tokens with a separator that cannot appear
// inside a whitespace-tokenized token.
std::unordered_map<std::string, std::size_t> ngram_counts(const SurfaceSentence& sentence,
                                                          std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (sentence.size() < n) return counts;
  for (std::size_t i = 0; i + n <= sentence.size(); ++i) {
    std::string key = sentence[i];
    for (std::size_t j = 1; j < n; ++j) {
      key.push_back('\x1f');
      key += sentence[i + j];
    }
    ++counts[key];
  }
  return counts;
}

std::string format_double(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

}  // namespace

std::string BleuReport::machine_row() const {
  std::ostringstream out;
  out << format_double("%.4f", bleu);
  for (double p : precisions) out << '\t' << format_double("%.6f", p);
  out << '\t' << format_double("%.6f", brevity_penalty) << '\t' << hyp_len << '\t' << ref_len;
  return out.str();
}

std::string BleuReport::pretty() const {
  std::ostringstream out;
  out << "BLEU = " << format_double("%.2f", bleu) << ", " << format_double("%.1f", precisions[0] * 100.0);
  for (std::size_t n = 1; n < kMaxOrder; ++n) {
    out << '/' << format_double("%.1f", precisions[n] * 100.0);
  }
  out << " (BP=" << format_double("%.3f", brevity_penalty) << ", ratio="
      << format_double("%.3f",
                       ref_len == 0 ? 0.0 : static_cast<double>(hyp_len) / static_cast<double>(ref_len))
      << ", hyp_len=" << hyp_len << ", ref_len=" << ref_len << ")";
  return out.str();
}

BleuReport corpus_bleu(const std::vector<SurfaceSentence>& hypotheses,
                       const std::vector<SurfaceSentence>& references) {
  if (hypotheses.empty() || references.empty()) {
    throw DataError("BLEU needs at least one sentence");
  }
  if (hypotheses.size() != references.size()) {
    throw DataError("hypothesis and reference corpora differ in length (" +
                    std::to_string(hypotheses.size()) + " vs " +
                    std::to_string(references.size()) + " sentences)");
  }

  BleuReport report;
  std::array<std::size_t, kMaxOrder> matched{};
  std::array<std::size_t, kMaxOrder> total{};
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const SurfaceSentence& hyp = hypotheses[i];
    const SurfaceSentence& ref = references[i];
    report.hyp_len += hyp.size();
    report.ref_len += ref.size();
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      if (hyp.size() < n) continue;
      total[n - 1] += hyp.size() - n + 1;
      const auto ref_counts = ngram_counts(ref, n);
      for (const auto& [gram, count] : ngram_counts(hyp, n)) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_mean = 0.0;
  bool any_zero = false;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    report.precisions[n] =
        total[n] == 0 ? 0.0 : static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    if (report.precisions[n] <= 0.0) {
      any_zero = true;
    } else {
      log_mean += std::log(report.precisions[n]) / static_cast<double>(kMaxOrder);
    }
  }

  report.brevity_penalty =
      (report.hyp_len == 0 || report.hyp_len < report.ref_len)
          ? (report.hyp_len == 0
                 ? 0.0
                 : std::exp(1.0 - static_cast<double>(report.ref_len) /
                                      static_cast<double>(report.hyp_len)))
          : 1.0;
  report.bleu = any_zero ? 0.0 : report.brevity_penalty * std::exp(log_mean) * 100.0;
  return report;
}

}  // namespace wo
