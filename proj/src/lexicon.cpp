#include "biorefine/lexicon.hpp"

namespace biorefine {

LexiconSet::LexiconSet(std::vector<Lexicon> lexicons) : lexicons_(std::move(lexicons)) {
  for (std::size_t i = 0; i < lexicons_.size(); ++i) {
    const Lexicon& lex = lexicons_[i];
    if (lex.source_labels.count(lex.target_label)) {
      throw LexiconConfigError("lexicon " + lex.name + ": target label '" +
                               std::string(label_name(lex.target_label)) +
                               "' is also one of its source labels");
    }
    for (const std::string& term : lex.terms) {
      if (term.empty()) throw LexiconConfigError("lexicon " + lex.name + ": empty term");
      for (EntityLabel src : lex.source_labels) {
        auto [it, inserted] = routes_.emplace(std::make_pair(src, term), i);
        if (!inserted) {
          throw LexiconConfigError("ambiguous routing: term '" + term + "' with source label '" +
                                   std::string(label_name(src)) + "' appears in both " +
                                   lexicons_[it->second].name + " and " + lex.name);
        }
      }
    }
  }
  for (const auto& [key, idx] : routes_) {
    const EntityLabel target = lexicons_[idx].target_label;
    auto chained = routes_.find(std::make_pair(target, key.second));
    if (chained != routes_.end()) {
      throw LexiconConfigError("chained routing: term '" + key.second + "' is corrected to '" +
                               std::string(label_name(target)) + "' by " + lexicons_[idx].name +
                               " and then away from it by " + lexicons_[chained->second].name);
    }
  }
}

std::optional<LexiconSet::Route> LexiconSet::route(EntityLabel source,
                                                   std::string_view lowered_span) const {
  auto it = routes_.find(std::make_pair(source, std::string(lowered_span)));
  if (it == routes_.end()) return std::nullopt;
  const Lexicon& lex = lexicons_[it->second];
  return Route{lex.target_label, &lex};
}

}  // namespace biorefine
