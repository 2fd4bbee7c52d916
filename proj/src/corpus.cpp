#include "biorefine/corpus.hpp"

#include <cmath>

#include "biorefine/text.hpp"

namespace biorefine {

namespace {

constexpr std::array<std::string_view, kLabelCount> kNames = {
    "bacteria", "biomedical_technique", "chemical", "DDF",   "dietary_supplement",
    "drug",     "food",                 "gene",     "human", "animal",
    "anatomical_location", "microbiome", "statistical_technique",
};

std::string label_key(std::string_view name) {
  std::string key;
  key.reserve(name.size());
  for (char c : name) {
    if (c == ' ') c = '_';
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    key.push_back(c);
  }
  return key;
}

std::string position(std::size_t start, std::size_t end) {
  return "[" + std::to_string(start) + ", " + std::to_string(end) + ")";
}

}  // namespace

std::string_view label_name(EntityLabel l) noexcept { return kNames[index_of(l)]; }

UnknownLabelError::UnknownLabelError(std::string name)
    : std::invalid_argument("unknown entity label '" + name + "'"), name_(std::move(name)) {}

std::optional<EntityLabel> try_parse_label(std::string_view name) {
  const std::string key = label_key(name);
  for (EntityLabel l : kAllLabels) {
    if (label_key(label_name(l)) == key) return l;
  }
  return std::nullopt;
}

EntityLabel parse_label(std::string_view name) {
  if (auto l = try_parse_label(name)) return *l;
  throw UnknownLabelError(std::string(name));
}

char location_tag(Location loc) noexcept { return loc == Location::Title ? 't' : 'a'; }

std::optional<Location> parse_location(std::string_view tag) {
  if (tag == "t") return Location::Title;
  if (tag == "a") return Location::Abstract;
  return std::nullopt;
}

CombinedText combine_text(const Document& doc, std::string_view joiner) {
  CombinedText out;
  out.combined.reserve(doc.title.size() + joiner.size() + doc.abstract.size());
  out.combined.append(doc.title).append(joiner).append(doc.abstract);
  out.title_len = text::length(doc.title);
  out.joiner_len = text::length(joiner);
  return out;
}

EntityMention to_combined_offsets(const EntityMention& m, std::size_t title_len,
                                  std::size_t joiner_len) {
  EntityMention out = m;
  if (m.location == Location::Abstract) {
    out.start_idx += title_len + joiner_len;
    out.end_idx += title_len + joiner_len;
  }
  return out;
}

EntityMention to_combined_offsets(const EntityMention& m, std::size_t title_len,
                                  std::size_t joiner_len, std::size_t combined_len) {
  EntityMention out = to_combined_offsets(m, title_len, joiner_len);
  const std::size_t field_end =
      m.location == Location::Title ? title_len : combined_len;
  if (out.end_idx > field_end || out.start_idx >= out.end_idx) {
    throw OffsetError("mention " + position(m.start_idx, m.end_idx) + " ('" + m.text_span +
                      "') is out of bounds for its field");
  }
  return out;
}

EntityMention to_local_offsets(const EntityMention& m, std::size_t title_len,
                               std::size_t joiner_len) {
  EntityMention out = m;
  const std::size_t shift = title_len + joiner_len;
  if (m.start_idx < title_len) {
    if (m.end_idx > title_len) {
      throw OffsetError("mention " + position(m.start_idx, m.end_idx) +
                        " straddles the title/abstract boundary at " +
                        std::to_string(title_len));
    }
    out.location = Location::Title;
    return out;
  }
  if (m.start_idx < shift) {
    throw OffsetError("mention " + position(m.start_idx, m.end_idx) +
                      " starts inside the title/abstract joiner");
  }
  out.location = Location::Abstract;
  out.start_idx -= shift;
  out.end_idx -= shift;
  return out;
}

Location assign_tag(const EntityMention& m, std::size_t title_len) noexcept {
  return m.start_idx < title_len ? Location::Title : Location::Abstract;
}

AnnotatedDocument to_combined(const AnnotatedDocument& d) {
  if (d.coordinate_space == CoordinateSpace::Combined) return d;
  AnnotatedDocument out = d;
  const std::size_t title_len = text::length(d.document.title);
  const std::size_t joiner_len = text::length(d.joiner);
  for (auto& m : out.mentions) m = to_combined_offsets(m, title_len, joiner_len);
  out.coordinate_space = CoordinateSpace::Combined;
  return out;
}

AnnotatedDocument to_per_field(const AnnotatedDocument& d) {
  if (d.coordinate_space == CoordinateSpace::PerField) return d;
  AnnotatedDocument out = d;
  const std::size_t title_len = text::length(d.document.title);
  const std::size_t joiner_len = text::length(d.joiner);
  for (auto& m : out.mentions) m = to_local_offsets(m, title_len, joiner_len);
  out.coordinate_space = CoordinateSpace::PerField;
  return out;
}

std::string_view violation_name(ViolationKind k) noexcept {
  switch (k) {
    case ViolationKind::EmptyDocId: return "empty-doc-id";
    case ViolationKind::EmptySpan: return "empty-span";
    case ViolationKind::OutOfBounds: return "out-of-bounds";
    case ViolationKind::SpanMismatch: return "span-mismatch";
    case ViolationKind::ScoreOutOfRange: return "score-out-of-range";
    case ViolationKind::Straddles: return "straddles-boundary";
    case ViolationKind::TagMismatch: return "tag-mismatch";
    case ViolationKind::InvalidText: return "invalid-utf8";
  }
  return "unknown";
}

std::string resolve_text(const AnnotatedDocument& d, const EntityMention& m) {
  if (d.coordinate_space == CoordinateSpace::Combined) {
    return d.document.title + d.joiner + d.document.abstract;
  }
  return m.location == Location::Title ? d.document.title : d.document.abstract;
}

std::vector<Violation> validate_document(const AnnotatedDocument& d) {
  std::vector<Violation> out;
  if (d.document.doc_id.empty()) {
    out.push_back({ViolationKind::EmptyDocId, std::nullopt, "document has an empty doc_id"});
  }

  text::IndexedText title, abstract, combined;
  try {
    title = text::IndexedText(d.document.title);
    abstract = text::IndexedText(d.document.abstract);
    combined = text::IndexedText(d.document.title + d.joiner + d.document.abstract);
  } catch (const text::Utf8Error& e) {
    out.push_back({ViolationKind::InvalidText, std::nullopt, e.what()});
    return out;
  }
  const std::size_t title_len = title.size();
  const std::size_t shift = title_len + text::length(d.joiner);

  for (std::size_t i = 0; i < d.mentions.size(); ++i) {
    const EntityMention& m = d.mentions[i];
    const std::string where = position(m.start_idx, m.end_idx);
    if (m.score && !(*m.score >= 0.0 && *m.score <= 1.0)) {
      out.push_back({ViolationKind::ScoreOutOfRange, i,
                     "score " + std::to_string(*m.score) + " outside [0, 1]"});
    }
    if (m.start_idx >= m.end_idx) {
      out.push_back({ViolationKind::EmptySpan, i, "span " + where + " is empty or reversed"});
      continue;
    }

    const text::IndexedText* space = nullptr;
    if (d.coordinate_space == CoordinateSpace::Combined) {
      space = &combined;
      if (m.start_idx < title_len && m.end_idx > title_len) {
        out.push_back({ViolationKind::Straddles, i,
                       "span " + where + " crosses the title/abstract boundary"});
        continue;
      }
      if (m.start_idx >= title_len && m.start_idx < shift) {
        out.push_back({ViolationKind::Straddles, i, "span " + where + " starts in the joiner"});
        continue;
      }
      if (assign_tag(m, title_len) != m.location) {
        out.push_back({ViolationKind::TagMismatch, i,
                       std::string("span ") + where + " carries tag '" + location_tag(m.location) +
                           "' but starts in the " +
                           (m.start_idx < title_len ? "title" : "abstract")});
      }
    } else {
      space = m.location == Location::Title ? &title : &abstract;
    }
    if (m.end_idx > space->size()) {
      out.push_back({ViolationKind::OutOfBounds, i,
                     "span " + where + " exceeds text length " + std::to_string(space->size())});
      continue;
    }
    const std::string_view slice = space->slice(m.start_idx, m.end_idx);
    if (slice != m.text_span) {
      out.push_back({ViolationKind::SpanMismatch, i,
                     "text_span '" + m.text_span + "' != text '" + std::string(slice) + "' at " +
                         where});
    }
  }
  return out;
}

}  // namespace biorefine
