#include "biorefine/crf/features.hpp"

#include <algorithm>
#include <stdexcept>

#include "biorefine/text.hpp"

namespace biorefine::crf {

namespace {

std::string suffix(std::string_view w, std::size_t n) {
  const std::u32string cps = text::decode(w);
  if (cps.size() <= n) return std::string(w);
  return text::encode(std::u32string_view(cps).substr(cps.size() - n));
}

void add_context(FeatureVector& f, const Token& t, std::string_view prefix) {
  const std::string p(prefix);
  f.push_back(p + "w=" + text::to_lower(t.text));
  if (word_is_upper(t.text)) f.push_back(p + "upper");
  if (word_is_title(t.text)) f.push_back(p + "title");
  f.push_back(p + "pos=" + t.pos);
  f.push_back(p + "pos2=" + std::string(coarse_pos(t.pos)));
}

}  // namespace

bool word_is_upper(std::string_view w) {
  const std::u32string cps = text::decode(w);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), [](char32_t c) {
    return text::is_letter(c) && text::is_upper(c);
  });
}

bool word_is_title(std::string_view w) {
  const std::u32string cps = text::decode(w);
  if (cps.empty() || !text::is_upper(cps.front())) return false;
  return std::none_of(cps.begin() + 1, cps.end(), [](char32_t c) { return text::is_upper(c); });
}

bool word_is_digit(std::string_view w) {
  const std::u32string cps = text::decode(w);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), text::is_digit);
}

FeatureVector extract_features(std::span<const Token> sentence, std::size_t i) {
  if (i >= sentence.size()) {
    throw std::out_of_range("feature position " + std::to_string(i) + " outside sentence of " +
                            std::to_string(sentence.size()) + " tokens");
  }
  const Token& t = sentence[i];
  FeatureVector f;
  f.reserve(24);
  f.push_back("bias");
  f.push_back("w=" + text::to_lower(t.text));
  f.push_back("suf2=" + suffix(t.text, 2));
  f.push_back("suf3=" + suffix(t.text, 3));
  if (word_is_upper(t.text)) f.push_back("upper");
  if (word_is_title(t.text)) f.push_back("title");
  if (word_is_digit(t.text)) f.push_back("digit");
  f.push_back("pos=" + t.pos);
  f.push_back("pos2=" + std::string(coarse_pos(t.pos)));
  if (i == 0) {
    f.push_back("BOS");
  } else {
    add_context(f, sentence[i - 1], "-1:");
  }
  if (i + 1 == sentence.size()) {
    f.push_back("EOS");
  } else {
    add_context(f, sentence[i + 1], "+1:");
  }
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

FeatureId FeatureIndex::intern(const std::string& feature) {
  if (auto it = ids_.find(feature); it != ids_.end()) return it->second;
  if (frozen_) throw std::logic_error("intern on a frozen feature index");
  const auto id = static_cast<FeatureId>(names_.size());
  names_.push_back(feature);
  ids_.emplace(feature, id);
  return id;
}

std::optional<FeatureId> FeatureIndex::find(std::string_view feature) const {
  if (auto it = ids_.find(std::string(feature)); it != ids_.end()) return it->second;
  return std::nullopt;
}

FeatureIndex FeatureIndex::from_names(std::vector<std::string> names) {
  FeatureIndex idx;
  for (auto& n : names) {
    if (idx.ids_.count(n)) throw std::invalid_argument("duplicate feature name '" + n + "'");
    idx.intern(n);
  }
  idx.freeze();
  return idx;
}

FeatureSequence index_sentence(std::span<const Token> sentence, FeatureIndex& index) {
  if (index.frozen()) return lookup_sentence(sentence, index);
  FeatureSequence seq(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    for (const auto& f : extract_features(sentence, i)) seq[i].push_back(index.intern(f));
  }
  return seq;
}

FeatureSequence lookup_sentence(std::span<const Token> sentence, const FeatureIndex& index) {
  FeatureSequence seq(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    for (const auto& f : extract_features(sentence, i)) {
      if (auto id = index.find(f)) seq[i].push_back(*id);
    }
  }
  return seq;
}

}  // namespace biorefine::crf
