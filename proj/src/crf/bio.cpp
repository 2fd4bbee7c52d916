#include "biorefine/crf/bio.hpp"

#include <algorithm>
#include <stdexcept>

namespace biorefine::crf {

std::size_t bio_index(BioLabel l) noexcept {
  if (l.prefix == BioPrefix::O) return 0;
  return 1 + 2 * index_of(l.entity) + (l.prefix == BioPrefix::I ? 1 : 0);
}

BioLabel bio_from_index(std::size_t i) {
  if (i >= kBioLabelCount) throw std::out_of_range("BIO label index " + std::to_string(i));
  if (i == 0) return {};
  return {(i - 1) % 2 == 0 ? BioPrefix::B : BioPrefix::I, kAllLabels[(i - 1) / 2]};
}

std::string bio_name(BioLabel l) {
  if (l.prefix == BioPrefix::O) return "O";
  return std::string(l.prefix == BioPrefix::B ? "B-" : "I-") + std::string(label_name(l.entity));
}

std::optional<BioLabel> parse_bio(std::string_view name) {
  if (name == "O") return BioLabel{};
  if (name.size() < 3 || name[1] != '-' || (name[0] != 'B' && name[0] != 'I')) return std::nullopt;
  auto entity = try_parse_label(name.substr(2));
  if (!entity) return std::nullopt;
  return BioLabel{name[0] == 'B' ? BioPrefix::B : BioPrefix::I, *entity};
}

BioEncoding spans_to_bio(std::span<const EntityMention> mentions, std::span<const Token> tokens) {
  BioEncoding out;
  out.labels.assign(tokens.size(), BioLabel{});

  std::vector<const EntityMention*> order;
  for (const auto& m : mentions) {
    if (m.start_idx < m.end_idx) order.push_back(&m);
  }
  std::stable_sort(order.begin(), order.end(), [](const EntityMention* a, const EntityMention* b) {
    const std::size_t la = a->end_idx - a->start_idx;
    const std::size_t lb = b->end_idx - b->start_idx;
    if (la != lb) return la > lb;
    return a->start_idx < b->start_idx;
  });

  std::vector<bool> taken(tokens.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> kept;  // character spans
  for (const EntityMention* m : order) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return m->start_idx < k.second && k.first < m->end_idx;
    });
    if (overlaps) {
      ++out.overlaps_dropped;
      continue;
    }
    kept.emplace_back(m->start_idx, m->end_idx);

    bool first = true;
    bool aligned_start = false;
    bool aligned_end = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const Token& t = tokens[i];
      if (t.end_idx <= m->start_idx || t.start_idx >= m->end_idx) continue;
      if (taken[i]) continue;
      taken[i] = true;
      if (first) aligned_start = t.start_idx == m->start_idx;
      aligned_end = t.end_idx == m->end_idx;
      out.labels[i] = {first ? BioPrefix::B : BioPrefix::I, m->label};
      first = false;
    }
    if (first || !aligned_start || !aligned_end) ++out.misaligned;
  }
  return out;
}

std::vector<EntityMention> bio_to_spans(const text::IndexedText& text,
                                        std::span<const Token> tokens,
                                        std::span<const BioLabel> labels) {
  if (tokens.size() != labels.size()) {
    throw std::invalid_argument("bio_to_spans: " + std::to_string(tokens.size()) + " tokens but " +
                                std::to_string(labels.size()) + " labels");
  }
  std::vector<EntityMention> out;
  std::optional<std::size_t> open;  // index in `out` of the run being extended
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const BioLabel& l = labels[i];
    if (l.prefix == BioPrefix::O) {
      open.reset();
      continue;
    }
    const bool continues = l.prefix == BioPrefix::I && open && out[*open].label == l.entity;
    if (continues) {
      out[*open].end_idx = tokens[i].end_idx;
      continue;
    }
    EntityMention m;
    m.start_idx = tokens[i].start_idx;
    m.end_idx = tokens[i].end_idx;
    m.label = l.entity;
    out.push_back(std::move(m));
    open = out.size() - 1;
  }
  for (auto& m : out) m.text_span = std::string(text.slice(m.start_idx, m.end_idx));
  return out;
}

}  // namespace biorefine::crf
