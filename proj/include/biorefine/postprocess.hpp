#pragma once

// Rule pipeline applied to model predictions before scoring:
//
//   remove_trivial   drop mentions whose text is their own label name
//   lexicon_correct  relabel mentions found in a correction gazetteer
//   merge_adjacent   join same-label fragments (off unless enabled)
//   strip_scores     drop confidence scores
//   finalize_tags    assign t/a tags and convert to per-field offsets
//
// Rules run in configured order over every mention of every document. Label
// changes, drops and merges are recorded in a RuleTrace.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "biorefine/corpus.hpp"
#include "biorefine/io.hpp"
#include "biorefine/lexicon.hpp"

namespace biorefine::postprocess {

enum class RuleId : unsigned char {
  RemoveTrivial,
  LexiconCorrect,
  MergeAdjacent,
  StripScores,
  FinalizeTags,
};

std::string_view rule_name(RuleId r) noexcept;
std::optional<RuleId> parse_rule(std::string_view name);

struct MergeConfig {
  bool enabled = false;
  // Coarse (two-character) POS classes a single connecting token may have.
  std::set<std::string> connecting_pos{"IN", "CC", "DT"};
};

struct RulePipeline {
  std::vector<RuleId> rules;
  LexiconSet lexicons;
  MergeConfig merge;

  // remove_trivial, lexicon_correct, merge_adjacent, strip_scores, finalize_tags.
  static RulePipeline standard(LexiconSet lexicons, MergeConfig merge = {});
};

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TraceAction : unsigned char { Drop, Relabel, Merge };

std::string_view trace_action_name(TraceAction a) noexcept;

struct TraceEntry {
  std::string doc_id;
  RuleId rule;
  TraceAction action;
  // Span of the affected mention in the coordinate space the rule ran in.
  // For merges this is the left fragment and `partner` the right one.
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
  std::string text_span;
  EntityLabel before = EntityLabel::Bacteria;
  std::optional<EntityLabel> after;  // absent for drops
  std::optional<std::pair<std::size_t, std::size_t>> partner;
  std::string detail;  // lexicon name, or the merged text
};

using RuleTrace = std::vector<TraceEntry>;

bool is_trivial(const EntityMention& m);

// Whole-span lookup after lowercasing; at most one correction.
EntityMention rule_lexicon_correct(const EntityMention& m, const LexiconSet& lexicons,
                                   const Lexicon** applied = nullptr);

AnnotatedDocument rule_merge_adjacent(const AnnotatedDocument& doc, const MergeConfig& config,
                                      RuleTrace* trace = nullptr);

AnnotatedDocument strip_scores(const AnnotatedDocument& doc);

// Converts combined-space documents to per-field offsets with assigned tags.
AnnotatedDocument finalize_tags(const AnnotatedDocument& doc);

struct PipelineResult {
  CorpusFile corpus;
  RuleTrace trace;
};

// Throws PipelineError for non-prediction input; post-processing annotated
// data is always a mistake.
PipelineResult run_pipeline(const CorpusFile& c, const RulePipeline& p);

// Reapplies `trace` to `input` (drops, relabels, merges, in trace order) and
// then any untraced rules in `p` (strip_scores, finalize_tags). The result
// equals run_pipeline(input, p).corpus.
CorpusFile replay_trace(const CorpusFile& input, const RuleTrace& trace, const RulePipeline& p);

// One JSON object per line.
std::string render_trace(const RuleTrace& trace);

// Pipeline configuration file (JSON):
//
//   {
//     "rules": ["remove_trivial", "lexicon_correct", "merge_adjacent",
//               "strip_scores", "finalize_tags"],
//     "joiner": "",
//     "lexicons": [ { "name": "KNOWN_GENES", "path": "lexicons/known_genes.txt",
//                     "target": "gene", "sources": ["chemical"] } ],
//     "merge": { "enabled": false, "connecting_pos": ["IN", "CC", "DT"] }
//   }
//
// Relative lexicon paths resolve against `base_dir`.
struct PipelineConfig {
  RulePipeline pipeline;
  std::optional<std::string> joiner;
  std::vector<std::string> lexicon_paths;
  std::vector<std::string> warnings;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PipelineConfig parse_pipeline_config(std::string_view bytes, const std::string& base_dir);
PipelineConfig load_pipeline_config(const std::string& path);

}  // namespace biorefine::postprocess
