#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biorefine/corpus.hpp"
#include "biorefine/crf/tokenize.hpp"
#include "biorefine/text.hpp"

namespace biorefine::crf {

enum class BioPrefix : unsigned char { O, B, I };

struct BioLabel {
  BioPrefix prefix = BioPrefix::O;
  EntityLabel entity = EntityLabel::Bacteria;  // ignored when prefix == O

  bool operator==(const BioLabel& o) const noexcept {
    return prefix == o.prefix && (prefix == BioPrefix::O || entity == o.entity);
  }
};

inline constexpr std::size_t kBioLabelCount = 2 * kLabelCount + 1;

// 0 = O, then B-x and I-x for each entity label in canonical order.
std::size_t bio_index(BioLabel l) noexcept;
BioLabel bio_from_index(std::size_t i);
std::string bio_name(BioLabel l);
std::optional<BioLabel> parse_bio(std::string_view name);

struct BioEncoding {
  std::vector<BioLabel> labels;
  // Mentions whose boundaries fall inside a token, or that cover no token.
  std::size_t misaligned = 0;
  // Mentions dropped while resolving overlaps.
  std::size_t overlaps_dropped = 0;
};

// Overlapping mentions are resolved by keeping the longer span, then the
// earlier one. Mention offsets must be in the same space as the tokens.
BioEncoding spans_to_bio(std::span<const EntityMention> mentions, std::span<const Token> tokens);

// Maximal B I* runs become mentions; an I that does not continue a run of
// the same entity starts a new one. Text spans are sliced from `text`.
// Location is left as Title; callers assign it.
std::vector<EntityMention> bio_to_spans(const text::IndexedText& text,
                                        std::span<const Token> tokens,
                                        std::span<const BioLabel> labels);

}  // namespace biorefine::crf
