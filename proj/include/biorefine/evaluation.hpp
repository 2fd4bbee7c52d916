#pragma once

// Exact-match scoring: a prediction is a true positive only if a gold
// mention has the same start, end and label. Matching is one-to-one, so
// duplicate predictions beyond the gold multiplicity are false positives.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "biorefine/corpus.hpp"
#include "biorefine/io.hpp"

namespace biorefine::eval {

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  MatchCounts& operator+=(const MatchCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const MatchCounts&) const = default;
};

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PrfScores&) const = default;
};

// Zero denominators yield 0.
PrfScores micro_scores(const MatchCounts& c) noexcept;

enum class MacroPolicy : unsigned char {
  All13,        // every label, absent ones contribute zeros
  PresentOnly,  // labels with tp = fp = fn = 0 are skipped
};

std::string_view policy_name(MacroPolicy p) noexcept;
std::optional<MacroPolicy> parse_policy(std::string_view name);

using PerLabelCounts = std::array<MatchCounts, kLabelCount>;

PrfScores macro_scores(const PerLabelCounts& per_label, MacroPolicy policy) noexcept;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> tp_pairs;  // (pred index, gold index)
  std::vector<std::size_t> fp;                                // pred indices
  std::vector<std::size_t> fn;                                // gold indices
};

// Throws EvalError on doc_id or coordinate-space mismatch.
MatchResult match_entities(const AnnotatedDocument& gold, const AnnotatedDocument& pred);

struct EvalReport {
  PerLabelCounts counts{};
  std::array<PrfScores, kLabelCount> scores{};
  MatchCounts pooled;
  PrfScores micro;
  PrfScores macro;
  std::size_t documents = 0;
  MacroPolicy policy = MacroPolicy::All13;
};

// Pools counts over all gold documents. Throws EvalError when a prediction
// names an unknown doc_id or the corpora use different coordinate spaces.
EvalReport evaluate_corpus(const CorpusFile& gold, const CorpusFile& pred,
                           MacroPolicy policy = MacroPolicy::All13);

// Per-label table with micro/macro footer, 4 decimal places.
std::string render_report(const EvalReport& r);
std::string report_json(const EvalReport& r);

}  // namespace biorefine::eval
