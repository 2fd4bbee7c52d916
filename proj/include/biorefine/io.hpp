#pragma once

// Corpus and prediction files, lexicon files, and label statistics.
//
// Corpus file (UTF-8 JSON):
//
//   {
//     "format": "biorefine-corpus",
//     "version": 1,
//     "provenance": "gold" | "platinum" | "silver" | "prediction",
//     "offset_convention": "half_open" | "inclusive",
//     "coordinate_space": "per_field" | "combined",
//     "joiner": "",
//     "documents": [
//       { "doc_id": "...", "title": "...", "abstract": "...",
//         "entities": [                       // "pred_entities" for predictions
//           { "start_idx": 5, "end_idx": 9, "tag": "a",
//             "text_span": "IL-6", "label": "gene", "score": 0.93 } ] } ]
//   }
//
// Offsets count Unicode code points. "tag" may be omitted in combined space,
// where it is derived from the start offset. "score" is only legal in
// prediction files.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "biorefine/corpus.hpp"
#include "biorefine/lexicon.hpp"

namespace biorefine {

enum class Provenance : unsigned char { Gold, Platinum, Silver, Prediction };

std::string_view provenance_name(Provenance p) noexcept;
std::optional<Provenance> parse_provenance(std::string_view name);

enum class OffsetConvention : unsigned char { HalfOpen, Inclusive };

struct CorpusFile {
  Provenance provenance = Provenance::Prediction;
  // Document order is preserved from the source file.
  std::vector<AnnotatedDocument> documents;

  const AnnotatedDocument* find(std::string_view doc_id) const;
  std::size_t mention_count() const;

  bool operator==(const CorpusFile&) const = default;
};

struct FormatOptions {
  // Overrides the file's offset_convention header when set.
  std::optional<OffsetConvention> offset_convention;
  // Overrides the file's joiner when set.
  std::optional<std::string> joiner;
};

// Rejection of a corpus file. Carries the document and mention that caused it
// when there is one.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::string doc_id = {},
             std::optional<std::size_t> mention_index = std::nullopt);

  const std::string& doc_id() const noexcept { return doc_id_; }
  std::optional<std::size_t> mention_index() const noexcept { return mention_index_; }

 private:
  std::string doc_id_;
  std::optional<std::size_t> mention_index_;
};

class ValidationError : public ParseError {
 public:
  ValidationError(std::string doc_id, Violation violation);
  const Violation& violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

// Throws ParseError, or ValidationError for the first failing document.
CorpusFile parse_corpus(std::string_view bytes, const FormatOptions& options = {});

// Like parse_corpus, but collects every validation violation instead of
// throwing on the first. Structural and label errors still throw.
struct LenientParse {
  CorpusFile corpus;
  std::vector<std::pair<std::string, Violation>> violations;  // (doc_id, violation)
};
LenientParse parse_corpus_lenient(std::string_view bytes, const FormatOptions& options = {});

class SerializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Prediction output: per-field offsets with t/a tags, half-open, no scores.
// Throws SerializationError for combined-space documents.
std::string write_predictions(const CorpusFile& c);

// Any corpus, in its own coordinate space, scores included.
std::string write_corpus(const CorpusFile& c);

struct LexiconParse {
  Lexicon lexicon;
  std::vector<std::string> warnings;
};

// One term per line, '#' starts a comment, blank lines ignored; terms are
// trimmed, lowercased and de-duplicated.
LexiconParse parse_lexicon(std::string_view bytes, EntityLabel target_label,
                           std::set<EntityLabel> source_labels, std::string name = {});

struct LabelCountReport {
  std::array<std::size_t, kLabelCount> counts{};
  std::size_t total = 0;

  double share(EntityLabel l) const noexcept;
  // Labels by descending count, then by name.
  std::vector<EntityLabel> ordered() const;
};

LabelCountReport label_counts(const CorpusFile& c);

// Two-column label/count table.
std::string render_label_counts(const LabelCountReport& r);
// Machine-readable counts and shares (JSON).
std::string label_counts_json(const LabelCountReport& r);

std::string read_file(const std::string& path);  // throws std::runtime_error
void write_file(const std::string& path, std::string_view bytes);

}  // namespace biorefine
