#include "biorefine/crf/tokenize.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <unordered_map>

#include "biorefine/text.hpp"

namespace biorefine::crf {

namespace {

bool is_hyphen(char32_t c) { return c == U'-' || c == 0x2010 || c == 0x2011; }

const std::unordered_map<std::string_view, std::string_view>& closed_class() {
  static const std::unordered_map<std::string_view, std::string_view> table = [] {
    std::unordered_map<std::string_view, std::string_view> t;
    auto add = [&t](std::string_view tag, std::initializer_list<std::string_view> words) {
      for (auto w : words) t.emplace(w, tag);
    };
    add("DT", {"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any",
               "no", "all", "both", "another", "either", "neither"});
    add("IN", {"of", "in", "on", "at", "by", "for", "with", "from", "into", "onto", "over",
               "under", "between", "among", "through", "during", "after", "before", "against",
               "within", "without", "via", "across", "about", "than", "as", "upon", "per",
               "whereas", "while", "because", "although", "since", "if", "whether", "toward",
               "towards", "versus", "vs", "throughout", "despite", "like", "around", "beyond"});
    add("CC", {"and", "or", "but", "nor", "yet", "plus"});
    add("TO", {"to"});
    add("PRP", {"i", "we", "you", "he", "she", "it", "they", "them", "us", "him", "me"});
    add("PRP$", {"our", "their", "its", "his", "her", "my", "your"});
    add("MD", {"can", "could", "may", "might", "must", "shall", "should", "will", "would"});
    add("VBZ", {"is", "has", "does"});
    add("VBP", {"are", "have", "do"});
    add("VBD", {"was", "were", "had", "did"});
    add("VB", {"be"});
    add("VBN", {"been"});
    add("VBG", {"being"});
    add("WDT", {"which"});
    add("WP", {"who", "whom", "what"});
    add("WRB", {"when", "where", "how", "why"});
    add("RB", {"not", "also", "however", "very", "only", "often", "thus", "therefore", "here",
               "further", "still", "even", "then", "well"});
    add("RBR", {"more", "less"});
    add("RBS", {"most", "least"});
    add("EX", {"there"});
    return t;
  }();
  return table;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string punctuation_tag(char32_t c) {
  switch (c) {
    case U'.': case U'!': case U'?': return ".";
    case U',': return ",";
    case U':': case U';': return ":";
    case U'(': case U'[': case U'{': return "-LRB-";
    case U')': case U']': case U'}': return "-RRB-";
    case U'"': case 0x201C: return "``";
    case 0x201D: return "''";
    case U'\'': case 0x2018: case 0x2019: return "POS";
    case U'-': case 0x2010: case 0x2011: case 0x2013: case 0x2014: return "HYPH";
    case U'$': case 0x20AC: case 0xA3: return "$";
    default: return "SYM";
  }
}

}  // namespace

std::vector<Token> tokenize(std::string_view utf8, std::size_t offset) {
  const std::u32string cps = text::decode(utf8);
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    const char32_t c = cps[i];
    if (text::is_space(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (text::is_alnum(c)) {
      while (j < n) {
        if (text::is_alnum(cps[j])) {
          ++j;
        } else if (is_hyphen(cps[j]) && j + 1 < n && text::is_alnum(cps[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
    }
    Token t;
    t.text = text::encode(std::u32string_view(cps).substr(i, j - i));
    t.start_idx = offset + i;
    t.end_idx = offset + j;
    out.push_back(std::move(t));
    i = j;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::span<const Token> tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const std::string& t = tokens[i].text;
    if (t != "." && t != "!" && t != "?") continue;
    const Token& next = tokens[i + 1];
    if (next.start_idx == tokens[i].end_idx) continue;  // no whitespace
    const std::u32string first = text::decode(next.text);
    if (first.empty() || !text::is_upper(first.front())) continue;
    out.emplace_back(begin, i + 1);
    begin = i + 1;
  }
  if (begin < tokens.size()) out.emplace_back(begin, tokens.size());
  return out;
}

std::string RulePosTagger::tag_word(std::string_view word, bool sentence_initial) {
  const std::u32string cps = text::decode(word);
  if (cps.empty()) return "SYM";
  if (cps.size() == 1 && !text::is_alnum(cps.front())) return punctuation_tag(cps.front());

  bool all_digit = true;
  bool has_digit = false;
  bool has_upper = false;
  for (char32_t c : cps) {
    all_digit = all_digit && (text::is_digit(c) || c == U'-');
    has_digit = has_digit || text::is_digit(c);
    has_upper = has_upper || text::is_upper(c);
  }
  if (all_digit && has_digit) return "CD";

  const std::string lower = text::to_lower(word);
  if (auto it = closed_class().find(lower); it != closed_class().end()) {
    return std::string(it->second);
  }
  if (has_upper && !sentence_initial) return "NNP";
  if (has_digit) return "NN";

  if (cps.size() > 4 && ends_with(lower, "ly")) return "RB";
  if (cps.size() > 4 && ends_with(lower, "ing")) return "VBG";
  if (cps.size() > 3 && ends_with(lower, "ed")) return "VBN";
  for (std::string_view suf : {"tion", "sion", "ment", "ness", "ity", "ism", "ance", "ence"}) {
    if (cps.size() > suf.size() + 1 && ends_with(lower, suf)) return "NN";
  }
  for (std::string_view suf :
       {"ous", "ful", "ive", "able", "ible", "al", "ic", "ary", "less", "ish", "ar"}) {
    if (cps.size() > suf.size() + 2 && ends_with(lower, suf)) return "JJ";
  }
  if (cps.size() > 3 && ends_with(lower, "s") && !ends_with(lower, "ss") &&
      !ends_with(lower, "us") && !ends_with(lower, "is")) {
    return "NNS";
  }
  return "NN";
}

void RulePosTagger::tag(std::span<Token> sentence) const {
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (sentence[i].pos.empty()) sentence[i].pos = tag_word(sentence[i].text, i == 0);
  }
}

PosSidecar PosSidecar::parse(std::string_view bytes) {
  PosSidecar out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::array<std::string_view, 4> fields;
    std::size_t f = 0;
    std::size_t b = 0;
    for (; f < 4; ++f) {
      const std::size_t tab = line.find('\t', b);
      if (f < 3 && tab == std::string_view::npos) break;
      fields[f] = line.substr(b, f < 3 ? tab - b : std::string_view::npos);
      b = tab + 1;
    }
    std::size_t start = 0;
    std::size_t end = 0;
    const auto parse_num = [](std::string_view s, std::size_t& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      return ec == std::errc() && p == s.data() + s.size();
    };
    if (f < 4 || fields[0].empty() || fields[3].empty() || !parse_num(fields[1], start) ||
        !parse_num(fields[2], end) || start >= end) {
      throw std::invalid_argument("POS sidecar line " + std::to_string(line_no) +
                                  ": expected doc_id<TAB>start<TAB>end<TAB>pos");
    }
    out.tags_[std::string(fields[0])][{start, end}] = std::string(fields[3]);
  }
  return out;
}

void PosSidecar::apply(std::string_view doc_id, std::span<Token> tokens) const {
  auto doc = tags_.find(doc_id);
  if (doc == tags_.end()) return;
  for (Token& t : tokens) {
    if (auto it = doc->second.find({t.start_idx, t.end_idx}); it != doc->second.end()) {
      t.pos = it->second;
    }
  }
}

void pos_tag(std::span<Token> tokens, const PosProvider& provider) {
  for (auto [b, e] : split_sentences(tokens)) provider.tag(tokens.subspan(b, e - b));
}

void pos_tag(std::span<Token> tokens) { pos_tag(tokens, RulePosTagger{}); }

std::string_view coarse_pos(std::string_view tag) noexcept { return tag.substr(0, 2); }

}  // namespace biorefine::crf
