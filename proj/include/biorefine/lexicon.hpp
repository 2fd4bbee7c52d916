#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biorefine/corpus.hpp"

namespace biorefine {

// A correction gazetteer: mentions labeled with one of `source_labels` whose
// lowercased text_span is in `terms` are relabeled `target_label`.
struct Lexicon {
  std::string name;
  std::set<std::string> terms;  // lowercase, trimmed, non-empty
  EntityLabel target_label = EntityLabel::Gene;
  std::set<EntityLabel> source_labels;

  bool operator==(const Lexicon&) const = default;
};

class LexiconConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable routing table over a set of lexicons, checked at construction:
//  - target_label is never one of a lexicon's own source labels;
//  - no (source label, term) pair routes to two lexicons;
//  - no term is routed onward from a label another lexicon corrects it to,
//    so every corrected label is a fixpoint.
class LexiconSet {
 public:
  LexiconSet() = default;
  explicit LexiconSet(std::vector<Lexicon> lexicons);

  struct Route {
    EntityLabel target;
    const Lexicon* lexicon;
  };

  // Whole-span lookup; `lowered_span` must already be lowercased.
  std::optional<Route> route(EntityLabel source, std::string_view lowered_span) const;

  const std::vector<Lexicon>& lexicons() const noexcept { return lexicons_; }
  bool empty() const noexcept { return lexicons_.empty(); }

 private:
  std::vector<Lexicon> lexicons_;
  std::map<std::pair<EntityLabel, std::string>, std::size_t, std::less<>> routes_;
};

}  // namespace biorefine
