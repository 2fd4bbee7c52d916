#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "biorefine/crf/tokenize.hpp"

namespace biorefine::crf {

// String features of one token, sorted and unique.
using FeatureVector = std::vector<std::string>;

// Word template for token i:
//   bias, w=<lower>, suf2=, suf3=, upper, title, digit, pos=, pos2=
//   -1:w=, -1:upper, -1:title, -1:pos=, -1:pos2=   (and +1:... likewise)
//   BOS at i = 0, EOS at i = n - 1
// Boolean features are emitted only when true. Requires POS on all tokens.
FeatureVector extract_features(std::span<const Token> sentence, std::size_t i);

// Case predicates used by the template.
bool word_is_upper(std::string_view w);  // every character an uppercase letter
bool word_is_title(std::string_view w);  // uppercase first letter, remaining letters lowercase
bool word_is_digit(std::string_view w);  // every character a decimal digit

using FeatureId = std::uint32_t;

// String -> dense id map. Frozen indices ignore unseen features.
class FeatureIndex {
 public:
  FeatureId intern(const std::string& feature);
  std::optional<FeatureId> find(std::string_view feature) const;

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }

  static FeatureIndex from_names(std::vector<std::string> names);

  bool operator==(const FeatureIndex& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, FeatureId> ids_;
  bool frozen_ = false;
};

// Per-position feature ids for one sentence.
using FeatureSequence = std::vector<std::vector<FeatureId>>;

// Interns (or, when frozen, looks up) every feature of every token.
FeatureSequence index_sentence(std::span<const Token> sentence, FeatureIndex& index);
FeatureSequence lookup_sentence(std::span<const Token> sentence, const FeatureIndex& index);

}  // namespace biorefine::crf
