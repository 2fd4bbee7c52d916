#pragma once

// Documents, entity labels and mentions, and the arithmetic between the
// per-field (title/abstract) and combined-text coordinate spaces.
//
// Offsets are half-open [start, end) and count Unicode code points.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biorefine {

enum class EntityLabel : unsigned char {
  Bacteria,
  BiomedicalTechnique,
  Chemical,
  DDF,
  DietarySupplement,
  Drug,
  Food,
  Gene,
  Human,
  Animal,
  AnatomicalLocation,
  Microbiome,
  StatisticalTechnique,
};

inline constexpr std::size_t kLabelCount = 13;

inline constexpr std::array<EntityLabel, kLabelCount> kAllLabels = {
    EntityLabel::Bacteria,           EntityLabel::BiomedicalTechnique, EntityLabel::Chemical,
    EntityLabel::DDF,                EntityLabel::DietarySupplement,   EntityLabel::Drug,
    EntityLabel::Food,               EntityLabel::Gene,                EntityLabel::Human,
    EntityLabel::Animal,             EntityLabel::AnatomicalLocation,  EntityLabel::Microbiome,
    EntityLabel::StatisticalTechnique,
};

constexpr std::size_t index_of(EntityLabel l) noexcept { return static_cast<std::size_t>(l); }

// Canonical identifier, e.g. "dietary_supplement" or "DDF".
std::string_view label_name(EntityLabel l) noexcept;

class UnknownLabelError : public std::invalid_argument {
 public:
  explicit UnknownLabelError(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Case-insensitive; spaces and underscores are interchangeable.
std::optional<EntityLabel> try_parse_label(std::string_view name);
EntityLabel parse_label(std::string_view name);  // throws UnknownLabelError

enum class Location : unsigned char { Title, Abstract };

char location_tag(Location loc) noexcept;  // 't' or 'a'
std::optional<Location> parse_location(std::string_view tag);

enum class CoordinateSpace : unsigned char { PerField, Combined };

struct Document {
  std::string doc_id;
  std::string title;
  std::string abstract;

  bool operator==(const Document&) const = default;
};

struct EntityMention {
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
  std::string text_span;
  EntityLabel label = EntityLabel::Bacteria;
  Location location = Location::Title;
  std::optional<double> score;

  bool operator==(const EntityMention&) const = default;
};

struct AnnotatedDocument {
  Document document;
  std::vector<EntityMention> mentions;
  CoordinateSpace coordinate_space = CoordinateSpace::PerField;
  // String inserted between title and abstract in combined space.
  std::string joiner;

  bool operator==(const AnnotatedDocument&) const = default;
};

struct CombinedText {
  std::string combined;
  std::size_t title_len = 0;
  std::size_t joiner_len = 0;

  std::size_t abstract_shift() const noexcept { return title_len + joiner_len; }
};

CombinedText combine_text(const Document& doc, std::string_view joiner);

class OffsetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Abstract mentions shift by title_len + joiner_len; title mentions are unchanged.
EntityMention to_combined_offsets(const EntityMention& m, std::size_t title_len,
                                  std::size_t joiner_len);
// Throws OffsetError when the result would exceed `combined_len`.
EntityMention to_combined_offsets(const EntityMention& m, std::size_t title_len,
                                  std::size_t joiner_len, std::size_t combined_len);

// Inverse of to_combined_offsets. Throws OffsetError for a span that straddles
// the title/abstract boundary or starts inside the joiner.
EntityMention to_local_offsets(const EntityMention& m, std::size_t title_len,
                               std::size_t joiner_len);

// Title iff start_idx < title_len.
Location assign_tag(const EntityMention& m, std::size_t title_len) noexcept;

AnnotatedDocument to_combined(const AnnotatedDocument& d);
AnnotatedDocument to_per_field(const AnnotatedDocument& d);

enum class ViolationKind : unsigned char {
  EmptyDocId,
  EmptySpan,
  OutOfBounds,
  SpanMismatch,
  ScoreOutOfRange,
  Straddles,
  TagMismatch,
  InvalidText,
};

std::string_view violation_name(ViolationKind k) noexcept;

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> mention_index;
  std::string detail;
};

// Every violated invariant, in mention order. Empty means valid.
std::vector<Violation> validate_document(const AnnotatedDocument& d);

// The text a mention's offsets resolve against: the title or abstract in
// per-field space, title + joiner + abstract in combined space.
std::string resolve_text(const AnnotatedDocument& d, const EntityMention& m);

}  // namespace biorefine
