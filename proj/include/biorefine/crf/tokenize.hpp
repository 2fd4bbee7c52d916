#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biorefine::crf {

struct Token {
  std::string text;
  std::size_t start_idx = 0;  // code points, half-open
  std::size_t end_idx = 0;
  std::string pos;  // empty until tagged

  bool operator==(const Token&) const = default;
};

// Maximal runs of letters/digits, with hyphens kept when both neighbours are
// alphanumeric ("IL-6", "TNF-α"), or single punctuation characters.
// Whitespace is skipped. Offsets are relative to `text` plus `offset`.
std::vector<Token> tokenize(std::string_view text, std::size_t offset = 0);

// [first, last) token index ranges. A sentence ends at '.', '!' or '?' when
// whitespace and an uppercase-initial token follow.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::span<const Token> tokens);

class PosProvider {
 public:
  virtual ~PosProvider() = default;
  // Fills `pos` on tokens that do not have one; the span is one sentence.
  virtual void tag(std::span<Token> sentence) const = 0;
};

// Deterministic closed-class lookup plus suffix rules over a Penn-style tagset.
class RulePosTagger final : public PosProvider {
 public:
  void tag(std::span<Token> sentence) const override;
  // Tag for a single word; `sentence_initial` disables the proper-noun rule.
  static std::string tag_word(std::string_view word, bool sentence_initial);
};

// Externally supplied tags keyed by (doc_id, start_idx, end_idx), loaded from
// a tab-separated sidecar: doc_id <TAB> start_idx <TAB> end_idx <TAB> pos.
// Offsets are in combined-text code points; '#' lines are comments.
class PosSidecar {
 public:
  static PosSidecar parse(std::string_view bytes);

  // Sets pos on tokens of `doc_id` that have an exact offset match.
  void apply(std::string_view doc_id, std::span<Token> tokens) const;
  std::size_t size() const noexcept { return tags_.size(); }

 private:
  std::map<std::string, std::map<std::pair<std::size_t, std::size_t>, std::string>, std::less<>>
      tags_;
};

// Tags every sentence of `tokens` with `provider`, leaving existing tags alone.
void pos_tag(std::span<Token> tokens, const PosProvider& provider);
void pos_tag(std::span<Token> tokens);  // RulePosTagger

// Penn coarse class: first two characters of the tag.
std::string_view coarse_pos(std::string_view tag) noexcept;

}  // namespace biorefine::crf
