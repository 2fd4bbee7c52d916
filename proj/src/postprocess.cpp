#include "biorefine/postprocess.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include <json.hpp>

#include "biorefine/crf/tokenize.hpp"
#include "biorefine/text.hpp"

namespace biorefine::postprocess {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 5> kRuleNames = {
    "remove_trivial", "lexicon_correct", "merge_adjacent", "strip_scores", "finalize_tags"};

// Lowercase, underscores to spaces, whitespace runs collapsed, trimmed.
std::string normalize_for_trivial(std::string_view s) {
  std::u32string cps = text::decode(s);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (c == U'_' || text::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(text::to_lower(c));
  }
  return text::encode(out);
}

bool gap_connects(std::string_view gap, const MergeConfig& config) {
  const std::u32string cps = text::decode(gap);
  const bool only_space_or_hyphen = std::all_of(cps.begin(), cps.end(), [](char32_t c) {
    return text::is_space(c) || c == U'-' || c == 0x2010 || c == 0x2011;
  });
  if (only_space_or_hyphen) return true;
  const auto tokens = crf::tokenize(gap);
  if (tokens.size() != 1) return false;
  const std::string tag = crf::RulePosTagger::tag_word(tokens.front().text, false);
  return config.connecting_pos.count(std::string(crf::coarse_pos(tag))) > 0;
}

std::optional<double> merged_score(const EntityMention& a, const EntityMention& b) {
  if (a.score && b.score) return std::min(*a.score, *b.score);
  return a.score ? a.score : b.score;
}

// Replaces mentions[left] by the merged span and erases mentions[right].
void apply_merge(AnnotatedDocument& doc, std::size_t left, std::size_t right,
                 const text::IndexedText& space_text) {
  EntityMention& a = doc.mentions[left];
  const EntityMention& b = doc.mentions[right];
  a.end_idx = b.end_idx;
  a.score = merged_score(a, b);
  a.text_span = std::string(space_text.slice(a.start_idx, a.end_idx));
  doc.mentions.erase(doc.mentions.begin() + static_cast<std::ptrdiff_t>(right));
}

// The text a mention's offsets index into, cached per field.
const text::IndexedText& space_for(const AnnotatedDocument& doc, const EntityMention& m,
                                   const text::IndexedText& title,
                                   const text::IndexedText& abstract,
                                   const text::IndexedText& combined) {
  if (doc.coordinate_space == CoordinateSpace::Combined) return combined;
  return m.location == Location::Title ? title : abstract;
}

bool same_field(const AnnotatedDocument& doc, const EntityMention& a, const EntityMention& b,
                std::size_t title_len) {
  if (doc.coordinate_space == CoordinateSpace::PerField) return a.location == b.location;
  return (a.start_idx < title_len) == (b.start_idx < title_len) &&
         (b.end_idx <= title_len || a.start_idx >= title_len);
}

// First match, or the last one when `last` is set (the merge rule's left side is
// the duplicate that sorts next to its partner).
std::size_t find_mention(const AnnotatedDocument& doc, std::size_t start, std::size_t end,
                         EntityLabel label, const std::string& what, bool last = false) {
  std::size_t found = doc.mentions.size();
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    const auto& m = doc.mentions[i];
    if (m.start_idx == start && m.end_idx == end && m.label == label) {
      found = i;
      if (!last) break;
    }
  }
  if (found < doc.mentions.size()) return found;
  throw PipelineError("trace replay: no " + std::string(label_name(label)) + " mention [" +
                      std::to_string(start) + ", " + std::to_string(end) + ") in document '" +
                      doc.document.doc_id + "' for " + what);
}

AnnotatedDocument* find_doc(CorpusFile& c, std::string_view id) {
  for (auto& d : c.documents) {
    if (d.document.doc_id == id) return &d;
  }
  return nullptr;
}

}  // namespace

std::string_view rule_name(RuleId r) noexcept { return kRuleNames[static_cast<std::size_t>(r)]; }

std::optional<RuleId> parse_rule(std::string_view name) {
  for (std::size_t i = 0; i < kRuleNames.size(); ++i) {
    if (kRuleNames[i] == name) return static_cast<RuleId>(i);
  }
  return std::nullopt;
}

std::string_view trace_action_name(TraceAction a) noexcept {
  switch (a) {
    case TraceAction::Drop: return "drop";
    case TraceAction::Relabel: return "relabel";
    case TraceAction::Merge: return "merge";
  }
  return "unknown";
}

RulePipeline RulePipeline::standard(LexiconSet lexicons, MergeConfig merge) {
  RulePipeline p;
  p.rules = {RuleId::RemoveTrivial, RuleId::LexiconCorrect, RuleId::MergeAdjacent,
             RuleId::StripScores, RuleId::FinalizeTags};
  p.lexicons = std::move(lexicons);
  p.merge = std::move(merge);
  return p;
}

bool is_trivial(const EntityMention& m) {
  return normalize_for_trivial(m.text_span) == normalize_for_trivial(label_name(m.label));
}

EntityMention rule_lexicon_correct(const EntityMention& m, const LexiconSet& lexicons,
                                   const Lexicon** applied) {
  if (applied) *applied = nullptr;
  auto route = lexicons.route(m.label, text::to_lower(m.text_span));
  if (!route) return m;
  EntityMention out = m;
  out.label = route->target;
  if (applied) *applied = route->lexicon;
  return out;
}

AnnotatedDocument rule_merge_adjacent(const AnnotatedDocument& doc, const MergeConfig& config,
                                      RuleTrace* trace) {
  AnnotatedDocument out = doc;
  if (!config.enabled || out.mentions.size() < 2) return out;

  const text::IndexedText title(doc.document.title);
  const text::IndexedText abstract(doc.document.abstract);
  const text::IndexedText combined(doc.document.title + doc.joiner + doc.document.abstract);
  const std::size_t title_len = title.size();

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> order(out.mentions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      const auto& a = out.mentions[x];
      const auto& b = out.mentions[y];
      if (a.location != b.location && doc.coordinate_space == CoordinateSpace::PerField) {
        return a.location < b.location;
      }
      return std::pair(a.start_idx, a.end_idx) < std::pair(b.start_idx, b.end_idx);
    });
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const EntityMention& a = out.mentions[order[k]];
      const EntityMention& b = out.mentions[order[k + 1]];
      if (a.label != b.label || a.end_idx > b.start_idx || !same_field(out, a, b, title_len)) {
        continue;
      }
      const text::IndexedText& space = space_for(out, a, title, abstract, combined);
      if (b.end_idx > space.size()) continue;
      if (!gap_connects(space.slice(a.end_idx, b.start_idx), config)) continue;

      TraceEntry e{out.document.doc_id, RuleId::MergeAdjacent, TraceAction::Merge,
                   a.start_idx,         a.end_idx,             a.text_span,
                   a.label,             a.label,               std::pair(b.start_idx, b.end_idx),
                   std::string(space.slice(a.start_idx, b.end_idx))};
      apply_merge(out, order[k], order[k + 1], space);
      if (trace) trace->push_back(std::move(e));
      changed = true;
      break;
    }
  }
  return out;
}

AnnotatedDocument strip_scores(const AnnotatedDocument& doc) {
  AnnotatedDocument out = doc;
  for (auto& m : out.mentions) m.score.reset();
  return out;
}

AnnotatedDocument finalize_tags(const AnnotatedDocument& doc) {
  if (doc.coordinate_space == CoordinateSpace::PerField) return doc;
  AnnotatedDocument out = doc;
  const std::size_t title_len = text::length(doc.document.title);
  for (auto& m : out.mentions) m.location = assign_tag(m, title_len);
  try {
    return to_per_field(out);
  } catch (const OffsetError& e) {
    throw PipelineError("document '" + doc.document.doc_id + "': " + e.what());
  }
}

PipelineResult run_pipeline(const CorpusFile& c, const RulePipeline& p) {
  if (c.provenance != Provenance::Prediction) {
    throw PipelineError("refusing to post-process a '" + std::string(provenance_name(c.provenance)) +
                        "' corpus; only predictions may be post-processed");
  }
  PipelineResult result;
  result.corpus.provenance = c.provenance;
  result.corpus.documents.reserve(c.documents.size());

  for (const AnnotatedDocument& input : c.documents) {
    AnnotatedDocument doc = input;
    for (RuleId rule : p.rules) {
      switch (rule) {
        case RuleId::RemoveTrivial: {
          std::vector<EntityMention> kept;
          kept.reserve(doc.mentions.size());
          for (auto& m : doc.mentions) {
            if (is_trivial(m)) {
              result.trace.push_back({doc.document.doc_id, rule, TraceAction::Drop, m.start_idx,
                                      m.end_idx, m.text_span, m.label, std::nullopt,
                                      std::nullopt, {}});
            } else {
              kept.push_back(std::move(m));
            }
          }
          doc.mentions = std::move(kept);
          break;
        }
        case RuleId::LexiconCorrect:
          for (auto& m : doc.mentions) {
            const Lexicon* lex = nullptr;
            EntityMention corrected = rule_lexicon_correct(m, p.lexicons, &lex);
            if (lex) {
              result.trace.push_back({doc.document.doc_id, rule, TraceAction::Relabel,
                                      m.start_idx, m.end_idx, m.text_span, m.label,
                                      corrected.label, std::nullopt, lex->name});
              m = std::move(corrected);
            }
          }
          break;
        case RuleId::MergeAdjacent:
          doc = rule_merge_adjacent(doc, p.merge, &result.trace);
          break;
        case RuleId::StripScores:
          doc = strip_scores(doc);
          break;
        case RuleId::FinalizeTags:
          doc = finalize_tags(doc);
          break;
      }
    }
    result.corpus.documents.push_back(std::move(doc));
  }
  return result;
}

CorpusFile replay_trace(const CorpusFile& input, const RuleTrace& trace, const RulePipeline& p) {
  CorpusFile out = input;
  for (RuleId rule : p.rules) {
    if (rule == RuleId::StripScores || rule == RuleId::FinalizeTags) {
      for (auto& d : out.documents) d = rule == RuleId::StripScores ? strip_scores(d) : finalize_tags(d);
      continue;
    }
    for (const TraceEntry& e : trace) {
      if (e.rule != rule) continue;
      AnnotatedDocument* doc = find_doc(out, e.doc_id);
      if (!doc) throw PipelineError("trace replay: unknown document '" + e.doc_id + "'");
      const std::size_t i = find_mention(*doc, e.start_idx, e.end_idx, e.before,
                                         std::string(trace_action_name(e.action)),
                                         e.action == TraceAction::Merge);
      switch (e.action) {
        case TraceAction::Drop:
          doc->mentions.erase(doc->mentions.begin() + static_cast<std::ptrdiff_t>(i));
          break;
        case TraceAction::Relabel:
          doc->mentions[i].label = *e.after;
          break;
        case TraceAction::Merge: {
          std::size_t j = doc->mentions.size();
          for (std::size_t k = 0; k < doc->mentions.size(); ++k) {
            const auto& m = doc->mentions[k];
            if (k != i && m.start_idx == e.partner->first && m.end_idx == e.partner->second &&
                m.label == e.before) {
              j = k;
              break;
            }
          }
          if (j == doc->mentions.size()) {
            throw PipelineError("trace replay: merge partner missing in '" + e.doc_id + "'");
          }
          const text::IndexedText space(resolve_text(*doc, doc->mentions[i]));
          apply_merge(*doc, i, j, space);
          break;
        }
      }
    }
  }
  return out;
}

std::string render_trace(const RuleTrace& trace) {
  std::string out;
  for (const TraceEntry& e : trace) {
    ojson j;
    j["doc_id"] = e.doc_id;
    j["rule"] = std::string(rule_name(e.rule));
    j["action"] = std::string(trace_action_name(e.action));
    j["start_idx"] = e.start_idx;
    j["end_idx"] = e.end_idx;
    j["text_span"] = e.text_span;
    j["before"] = std::string(label_name(e.before));
    j["after"] = e.after ? ojson(std::string(label_name(*e.after))) : ojson(nullptr);
    if (e.partner) j["partner"] = {e.partner->first, e.partner->second};
    if (!e.detail.empty()) j["detail"] = e.detail;
    out += j.dump(-1, ' ', false, ojson::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

PipelineConfig parse_pipeline_config(std::string_view bytes, const std::string& base_dir) {
  ojson root;
  try {
    root = ojson::parse(bytes.begin(), bytes.end());
  } catch (const ojson::parse_error& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("pipeline config: root must be an object");

  PipelineConfig cfg;
  for (const auto& [key, _] : root.items()) {
    if (key != "rules" && key != "joiner" && key != "lexicons" && key != "merge") {
      throw ConfigError("pipeline config: unknown key '" + key + "'");
    }
  }

  if (root.contains("rules")) {
    const ojson& rules = root["rules"];
    if (!rules.is_array()) throw ConfigError("pipeline config: 'rules' must be an array");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string where = "pipeline config: rules[" + std::to_string(i) + "]";
      if (!rules[i].is_string()) throw ConfigError(where + " must be a string");
      auto id = parse_rule(rules[i].get<std::string>());
      if (!id) throw ConfigError(where + ": unknown rule '" + rules[i].get<std::string>() + "'");
      if (std::find(cfg.pipeline.rules.begin(), cfg.pipeline.rules.end(), *id) !=
          cfg.pipeline.rules.end()) {
        throw ConfigError(where + ": duplicate rule '" + rules[i].get<std::string>() + "'");
      }
      cfg.pipeline.rules.push_back(*id);
    }
  } else {
    cfg.pipeline.rules = RulePipeline::standard({}).rules;
  }

  if (root.contains("joiner")) {
    if (!root["joiner"].is_string()) throw ConfigError("pipeline config: 'joiner' must be a string");
    cfg.joiner = root["joiner"].get<std::string>();
  }

  std::vector<Lexicon> lexicons;
  if (root.contains("lexicons")) {
    const ojson& lexs = root["lexicons"];
    if (!lexs.is_array()) throw ConfigError("pipeline config: 'lexicons' must be an array");
    for (std::size_t i = 0; i < lexs.size(); ++i) {
      const std::string where = "pipeline config: lexicons[" + std::to_string(i) + "]";
      const ojson& jl = lexs[i];
      if (!jl.is_object()) throw ConfigError(where + " must be an object");
      for (const char* field : {"name", "path", "target"}) {
        if (!jl.contains(field) || !jl[field].is_string()) {
          throw ConfigError(where + ": '" + field + "' must be a string");
        }
      }
      if (!jl.contains("sources") || !jl["sources"].is_array()) {
        throw ConfigError(where + ": 'sources' must be an array of labels");
      }
      const std::string name = jl["name"].get<std::string>();
      auto target = try_parse_label(jl["target"].get<std::string>());
      if (!target) {
        throw ConfigError(where + ".target: unknown label '" + jl["target"].get<std::string>() + "'");
      }
      std::set<EntityLabel> sources;
      for (const auto& s : jl["sources"]) {
        auto l = s.is_string() ? try_parse_label(s.get<std::string>()) : std::nullopt;
        if (!l) throw ConfigError(where + ".sources: unknown label " + s.dump());
        sources.insert(*l);
      }
      std::filesystem::path path = jl["path"].get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
      std::string bytes_lex;
      try {
        bytes_lex = read_file(path.string());
      } catch (const std::exception& e) {
        throw ConfigError(where + ".path: " + e.what());
      }
      LexiconParse parsed;
      try {
        parsed = parse_lexicon(bytes_lex, *target, std::move(sources), name);
      } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
      }
      for (auto& w : parsed.warnings) cfg.warnings.push_back(std::move(w));
      cfg.lexicon_paths.push_back(path.string());
      lexicons.push_back(std::move(parsed.lexicon));
    }
  }
  try {
    cfg.pipeline.lexicons = LexiconSet(std::move(lexicons));
  } catch (const LexiconConfigError& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }

  if (root.contains("merge")) {
    const ojson& jm = root["merge"];
    if (!jm.is_object()) throw ConfigError("pipeline config: 'merge' must be an object");
    if (jm.contains("enabled")) {
      if (!jm["enabled"].is_boolean()) throw ConfigError("pipeline config: merge.enabled must be a boolean");
      cfg.pipeline.merge.enabled = jm["enabled"].get<bool>();
    }
    if (jm.contains("connecting_pos")) {
      if (!jm["connecting_pos"].is_array()) {
        throw ConfigError("pipeline config: merge.connecting_pos must be an array");
      }
      cfg.pipeline.merge.connecting_pos.clear();
      for (const auto& t : jm["connecting_pos"]) {
        if (!t.is_string()) throw ConfigError("pipeline config: merge.connecting_pos entries must be strings");
        cfg.pipeline.merge.connecting_pos.insert(std::string(crf::coarse_pos(t.get<std::string>())));
      }
    }
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_pipeline_config(bytes, std::filesystem::path(path).parent_path().string());
}

}  // namespace biorefine::postprocess
