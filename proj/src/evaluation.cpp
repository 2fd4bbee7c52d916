#include "biorefine/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include <json.hpp>

namespace biorefine::eval {

namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) noexcept { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

using Key = std::tuple<std::size_t, std::size_t, EntityLabel>;

Key key_of(const EntityMention& m) { return {m.start_idx, m.end_idx, m.label}; }

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void space_check(const AnnotatedDocument& gold, const AnnotatedDocument& pred) {
  if (gold.coordinate_space != pred.coordinate_space) {
    throw EvalError("document '" + gold.document.doc_id +
                    "': gold and predictions use different coordinate spaces");
  }
  if (gold.coordinate_space == CoordinateSpace::Combined && gold.joiner != pred.joiner) {
    throw EvalError("document '" + gold.document.doc_id +
                    "': gold and predictions use different joiners");
  }
}

}  // namespace

PrfScores micro_scores(const MatchCounts& c) noexcept {
  PrfScores s;
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

std::string_view policy_name(MacroPolicy p) noexcept {
  return p == MacroPolicy::All13 ? "all_13" : "present_only";
}

std::optional<MacroPolicy> parse_policy(std::string_view name) {
  if (name == "all_13") return MacroPolicy::All13;
  if (name == "present_only") return MacroPolicy::PresentOnly;
  return std::nullopt;
}

PrfScores macro_scores(const PerLabelCounts& per_label, MacroPolicy policy) noexcept {
  PrfScores sum;
  std::size_t n = 0;
  for (const MatchCounts& c : per_label) {
    if (policy == MacroPolicy::PresentOnly && c.tp == 0 && c.fp == 0 && c.fn == 0) continue;
    const PrfScores s = micro_scores(c);
    sum.precision += s.precision;
    sum.recall += s.recall;
    sum.f1 += s.f1;
    ++n;
  }
  if (n == 0) return {};
  const double dn = static_cast<double>(n);
  return {sum.precision / dn, sum.recall / dn, sum.f1 / dn};
}

MatchResult match_entities(const AnnotatedDocument& gold, const AnnotatedDocument& pred) {
  if (gold.document.doc_id != pred.document.doc_id) {
    throw EvalError("cannot match document '" + pred.document.doc_id + "' against gold '" +
                    gold.document.doc_id + "'");
  }
  space_check(gold, pred);

  // Unused gold indices per key, consumed in ascending order.
  std::map<Key, std::vector<std::size_t>> pool;
  for (std::size_t g = gold.mentions.size(); g-- > 0;) {
    pool[key_of(gold.mentions[g])].push_back(g);
  }
  MatchResult out;
  for (std::size_t p = 0; p < pred.mentions.size(); ++p) {
    auto it = pool.find(key_of(pred.mentions[p]));
    if (it == pool.end() || it->second.empty()) {
      out.fp.push_back(p);
      continue;
    }
    out.tp_pairs.emplace_back(p, it->second.back());
    it->second.pop_back();
  }
  for (const auto& [key, left] : pool) out.fn.insert(out.fn.end(), left.begin(), left.end());
  std::sort(out.fn.begin(), out.fn.end());
  return out;
}

EvalReport evaluate_corpus(const CorpusFile& gold, const CorpusFile& pred, MacroPolicy policy) {
  std::map<std::string_view, const AnnotatedDocument*> pred_docs;
  for (const auto& d : pred.documents) {
    if (!gold.find(d.document.doc_id)) {
      throw EvalError("prediction for unknown document '" + d.document.doc_id + "'");
    }
    if (!pred_docs.emplace(d.document.doc_id, &d).second) {
      throw EvalError("duplicate prediction document '" + d.document.doc_id + "'");
    }
  }

  EvalReport r;
  r.policy = policy;
  r.documents = gold.documents.size();
  for (const AnnotatedDocument& g : gold.documents) {
    auto it = pred_docs.find(g.document.doc_id);
    if (it == pred_docs.end()) {
      for (const auto& m : g.mentions) ++r.counts[index_of(m.label)].fn;
      continue;
    }
    const AnnotatedDocument& p = *it->second;
    const MatchResult m = match_entities(g, p);
    for (const auto& [pi, gi] : m.tp_pairs) ++r.counts[index_of(p.mentions[pi].label)].tp;
    for (std::size_t pi : m.fp) ++r.counts[index_of(p.mentions[pi].label)].fp;
    for (std::size_t gi : m.fn) ++r.counts[index_of(g.mentions[gi].label)].fn;
  }
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    r.scores[l] = micro_scores(r.counts[l]);
    r.pooled += r.counts[l];
  }
  r.micro = micro_scores(r.pooled);
  r.macro = macro_scores(r.counts, policy);
  return r;
}

std::string render_report(const EvalReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %6s %6s %6s %9s %9s %9s\n", "label", "tp", "fp", "fn",
                "precision", "recall", "f1");
  out += line;
  for (EntityLabel l : kAllLabels) {
    const MatchCounts& c = r.counts[index_of(l)];
    const PrfScores& s = r.scores[index_of(l)];
    std::snprintf(line, sizeof line, "%-24s %6zu %6zu %6zu %9s %9s %9s\n",
                  std::string(label_name(l)).c_str(), c.tp, c.fp, c.fn,
                  fixed4(s.precision).c_str(), fixed4(s.recall).c_str(), fixed4(s.f1).c_str());
    out += line;
  }
  out += std::string(74, '-') + "\n";
  std::snprintf(line, sizeof line, "%-24s %6zu %6zu %6zu %9s %9s %9s\n", "micro", r.pooled.tp,
                r.pooled.fp, r.pooled.fn, fixed4(r.micro.precision).c_str(),
                fixed4(r.micro.recall).c_str(), fixed4(r.micro.f1).c_str());
  out += line;
  const std::string macro_label = "macro (" + std::string(policy_name(r.policy)) + ")";
  std::snprintf(line, sizeof line, "%-24s %6s %6s %6s %9s %9s %9s\n", macro_label.c_str(), "", "",
                "", fixed4(r.macro.precision).c_str(), fixed4(r.macro.recall).c_str(),
                fixed4(r.macro.f1).c_str());
  out += line;
  std::snprintf(line, sizeof line, "documents: %zu\n", r.documents);
  out += line;
  return out;
}

std::string report_json(const EvalReport& r) {
  using ojson = nlohmann::ordered_json;
  const auto prf = [](const PrfScores& s) {
    ojson j;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["f1"] = s.f1;
    return j;
  };
  ojson root;
  ojson config;
  config["macro_policy"] = std::string(policy_name(r.policy));
  config["zero_division"] = 0;
  config["matching"] = "exact_one_to_one";
  root["config"] = std::move(config);
  root["documents"] = r.documents;
  ojson labels = ojson::array();
  for (EntityLabel l : kAllLabels) {
    const MatchCounts& c = r.counts[index_of(l)];
    ojson row = prf(r.scores[index_of(l)]);
    row["label"] = std::string(label_name(l));
    row["tp"] = c.tp;
    row["fp"] = c.fp;
    row["fn"] = c.fn;
    labels.push_back(std::move(row));
  }
  root["labels"] = std::move(labels);
  ojson micro = prf(r.micro);
  micro["tp"] = r.pooled.tp;
  micro["fp"] = r.pooled.fp;
  micro["fn"] = r.pooled.fn;
  root["micro"] = std::move(micro);
  root["macro"] = prf(r.macro);
  return root.dump(2) + "\n";
}

}  // namespace biorefine::eval
