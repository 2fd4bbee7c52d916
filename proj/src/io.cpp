#include "biorefine/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "biorefine/text.hpp"

namespace biorefine {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormatName = "biorefine-corpus";
constexpr int kFormatVersion = 1;

std::string_view mentions_key(Provenance p) {
  return p == Provenance::Prediction ? "pred_entities" : "entities";
}

std::string mention_context(const std::string& doc_id, std::size_t i) {
  return "document '" + doc_id + "', mention " + std::to_string(i);
}

const ojson& require(const ojson& obj, std::string_view key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string require_string(const ojson& obj, std::string_view key, const std::string& where) {
  const ojson& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::size_t require_offset(const ojson& obj, std::string_view key, const std::string& doc_id,
                           std::size_t i) {
  const std::string where = mention_context(doc_id, i);
  const ojson& v = require(obj, key, where);
  if (!v.is_number_unsigned()) {
    throw ParseError(where + ": '" + std::string(key) + "' must be a non-negative integer", doc_id,
                     i);
  }
  return v.get<std::size_t>();
}

CorpusFile parse_structure(std::string_view bytes, const FormatOptions& options) {
  ojson root;
  try {
    root = ojson::parse(bytes.begin(), bytes.end());
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("corpus root must be a JSON object");

  const std::string where = "corpus header";
  if (auto it = root.find("format"); it != root.end() && *it != kFormatName) {
    throw ParseError(where + ": unsupported format '" + it->dump() + "'");
  }
  if (auto it = root.find("version"); it != root.end()) {
    if (!it->is_number_integer() || it->get<int>() != kFormatVersion) {
      throw ParseError(where + ": unsupported version " + it->dump());
    }
  }

  CorpusFile out;
  const std::string prov = require_string(root, "provenance", where);
  if (auto p = parse_provenance(prov)) {
    out.provenance = *p;
  } else {
    throw ParseError(where + ": unknown provenance '" + prov + "'");
  }

  // The header must declare the convention unless the caller overrides it.
  OffsetConvention convention = OffsetConvention::HalfOpen;
  if (options.offset_convention) {
    convention = *options.offset_convention;
  } else {
    const std::string conv = require_string(root, "offset_convention", where);
    if (conv == "half_open") {
      convention = OffsetConvention::HalfOpen;
    } else if (conv == "inclusive") {
      convention = OffsetConvention::Inclusive;
    } else {
      throw ParseError(where + ": unknown offset_convention '" + conv + "'");
    }
  }

  CoordinateSpace space = CoordinateSpace::PerField;
  if (root.contains("coordinate_space")) {
    const std::string cs = require_string(root, "coordinate_space", where);
    if (cs == "per_field") {
      space = CoordinateSpace::PerField;
    } else if (cs == "combined") {
      space = CoordinateSpace::Combined;
    } else {
      throw ParseError(where + ": unknown coordinate_space '" + cs + "'");
    }
  }

  std::string joiner;
  if (root.contains("joiner")) joiner = require_string(root, "joiner", where);
  if (options.joiner) joiner = *options.joiner;

  const ojson& docs = require(root, "documents", where);
  if (!docs.is_array()) throw ParseError(where + ": 'documents' must be an array");

  std::unordered_set<std::string> seen;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const ojson& jd = docs[d];
    const std::string dwhere = "document #" + std::to_string(d);
    if (!jd.is_object()) throw ParseError(dwhere + ": must be an object");

    AnnotatedDocument doc;
    doc.coordinate_space = space;
    doc.joiner = joiner;
    doc.document.doc_id = require_string(jd, "doc_id", dwhere);
    const std::string& id = doc.document.doc_id;
    if (id.empty()) throw ParseError(dwhere + ": empty doc_id");
    if (!seen.insert(id).second) throw ParseError("duplicate doc_id '" + id + "'", id);
    const std::string idwhere = "document '" + id + "'";
    doc.document.title = require_string(jd, "title", idwhere);
    doc.document.abstract = require_string(jd, "abstract", idwhere);

    std::size_t title_len = 0;
    try {
      title_len = text::length(doc.document.title);
      text::length(doc.document.abstract);
    } catch (const text::Utf8Error& e) {
      throw ParseError(idwhere + ": " + e.what(), id);
    }

    const bool has_pred = jd.contains("pred_entities");
    const bool has_gold = jd.contains("entities");
    if (has_pred && has_gold) {
      throw ParseError(idwhere + ": both 'entities' and 'pred_entities' present", id);
    }
    if (!has_pred && !has_gold) {
      throw ParseError(idwhere + ": missing field '" + std::string(mentions_key(out.provenance)) +
                           "'",
                       id);
    }
    const ojson& ents = has_pred ? jd["pred_entities"] : jd["entities"];
    if (!ents.is_array()) throw ParseError(idwhere + ": entity list must be an array", id);

    for (std::size_t i = 0; i < ents.size(); ++i) {
      const ojson& je = ents[i];
      const std::string mwhere = mention_context(id, i);
      if (!je.is_object()) throw ParseError(mwhere + ": must be an object", id, i);

      EntityMention m;
      m.start_idx = require_offset(je, "start_idx", id, i);
      m.end_idx = require_offset(je, "end_idx", id, i);
      if (convention == OffsetConvention::Inclusive) m.end_idx += 1;

      const ojson& jt = require(je, "text_span", mwhere);
      if (!jt.is_string()) throw ParseError(mwhere + ": 'text_span' must be a string", id, i);
      m.text_span = jt.get<std::string>();

      const ojson& jl = require(je, "label", mwhere);
      if (!jl.is_string()) throw ParseError(mwhere + ": 'label' must be a string", id, i);
      if (auto l = try_parse_label(jl.get<std::string>())) {
        m.label = *l;
      } else {
        throw ParseError(mwhere + ": unknown entity label '" + jl.get<std::string>() + "'", id, i);
      }

      if (auto it = je.find("tag"); it != je.end()) {
        auto loc = it->is_string() ? parse_location(it->get<std::string>()) : std::nullopt;
        if (!loc) throw ParseError(mwhere + ": 'tag' must be \"t\" or \"a\"", id, i);
        m.location = *loc;
      } else if (space == CoordinateSpace::Combined) {
        m.location = assign_tag(m, title_len);
      } else {
        throw ParseError(mwhere + ": missing field 'tag' (required in per_field space)", id, i);
      }

      if (auto it = je.find("score"); it != je.end() && !it->is_null()) {
        if (out.provenance != Provenance::Prediction) {
          throw ParseError(mwhere + ": 'score' is only allowed in prediction files", id, i);
        }
        if (!it->is_number()) throw ParseError(mwhere + ": 'score' must be a number", id, i);
        m.score = it->get<double>();
      }
      doc.mentions.push_back(std::move(m));
    }
    out.documents.push_back(std::move(doc));
  }
  return out;
}

ojson mention_json(const EntityMention& m, bool with_score) {
  ojson j;
  j["start_idx"] = m.start_idx;
  j["end_idx"] = m.end_idx;
  j["tag"] = std::string(1, location_tag(m.location));
  j["text_span"] = m.text_span;
  j["label"] = std::string(label_name(m.label));
  if (with_score && m.score) j["score"] = *m.score;
  return j;
}

std::string serialize(const CorpusFile& c, bool with_scores, CoordinateSpace space) {
  ojson root;
  root["format"] = std::string(kFormatName);
  root["version"] = kFormatVersion;
  root["provenance"] = std::string(provenance_name(c.provenance));
  root["offset_convention"] = "half_open";
  root["coordinate_space"] = space == CoordinateSpace::PerField ? "per_field" : "combined";
  root["joiner"] = c.documents.empty() ? std::string() : c.documents.front().joiner;
  ojson docs = ojson::array();
  for (const auto& d : c.documents) {
    if (d.coordinate_space != space) {
      throw SerializationError("document '" + d.document.doc_id +
                               "' is in a different coordinate space from the rest of the corpus");
    }
    if (!c.documents.empty() && d.joiner != c.documents.front().joiner) {
      throw SerializationError("document '" + d.document.doc_id +
                               "' uses a different joiner from the rest of the corpus");
    }
    ojson jd;
    jd["doc_id"] = d.document.doc_id;
    jd["title"] = d.document.title;
    jd["abstract"] = d.document.abstract;
    ojson ents = ojson::array();
    for (const auto& m : d.mentions) ents.push_back(mention_json(m, with_scores));
    jd[std::string(mentions_key(c.provenance))] = std::move(ents);
    docs.push_back(std::move(jd));
  }
  root["documents"] = std::move(docs);
  return root.dump(2, ' ', false, ojson::error_handler_t::strict) + "\n";
}

}  // namespace

std::string_view provenance_name(Provenance p) noexcept {
  switch (p) {
    case Provenance::Gold: return "gold";
    case Provenance::Platinum: return "platinum";
    case Provenance::Silver: return "silver";
    case Provenance::Prediction: return "prediction";
  }
  return "prediction";
}

std::optional<Provenance> parse_provenance(std::string_view name) {
  for (Provenance p : {Provenance::Gold, Provenance::Platinum, Provenance::Silver,
                       Provenance::Prediction}) {
    if (provenance_name(p) == name) return p;
  }
  return std::nullopt;
}

const AnnotatedDocument* CorpusFile::find(std::string_view doc_id) const {
  for (const auto& d : documents) {
    if (d.document.doc_id == doc_id) return &d;
  }
  return nullptr;
}

std::size_t CorpusFile::mention_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.mentions.size();
  return n;
}

ParseError::ParseError(std::string message, std::string doc_id,
                       std::optional<std::size_t> mention_index)
    : std::runtime_error(std::move(message)),
      doc_id_(std::move(doc_id)),
      mention_index_(mention_index) {}

ValidationError::ValidationError(std::string doc_id, Violation violation)
    : ParseError("document '" + doc_id + "'" +
                     (violation.mention_index
                          ? ", mention " + std::to_string(*violation.mention_index)
                          : std::string()) +
                     ": " + std::string(violation_name(violation.kind)) + ": " + violation.detail,
                 doc_id, violation.mention_index),
      violation_(std::move(violation)) {}

LenientParse parse_corpus_lenient(std::string_view bytes, const FormatOptions& options) {
  LenientParse out;
  out.corpus = parse_structure(bytes, options);
  for (const auto& d : out.corpus.documents) {
    for (auto& v : validate_document(d)) out.violations.emplace_back(d.document.doc_id, std::move(v));
  }
  return out;
}

CorpusFile parse_corpus(std::string_view bytes, const FormatOptions& options) {
  CorpusFile c = parse_structure(bytes, options);
  for (const auto& d : c.documents) {
    auto violations = validate_document(d);
    if (!violations.empty()) throw ValidationError(d.document.doc_id, std::move(violations.front()));
  }
  return c;
}

std::string write_predictions(const CorpusFile& c) {
  for (const auto& d : c.documents) {
    if (d.coordinate_space != CoordinateSpace::PerField) {
      throw SerializationError("document '" + d.document.doc_id +
                               "' is in combined space; localize offsets before writing predictions");
    }
  }
  return serialize(c, false, CoordinateSpace::PerField);
}

std::string write_corpus(const CorpusFile& c) {
  const CoordinateSpace space =
      c.documents.empty() ? CoordinateSpace::PerField : c.documents.front().coordinate_space;
  return serialize(c, true, space);
}

LexiconParse parse_lexicon(std::string_view bytes, EntityLabel target_label,
                           std::set<EntityLabel> source_labels, std::string name) {
  LexiconParse out;
  out.lexicon.name = std::move(name);
  out.lexicon.target_label = target_label;
  out.lexicon.source_labels = std::move(source_labels);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::string term;
    try {
      term = text::to_lower(text::trim(line));
    } catch (const text::Utf8Error& e) {
      throw ParseError("lexicon " + out.lexicon.name + ", line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (!term.empty()) out.lexicon.terms.insert(std::move(term));
    if (nl == bytes.size()) break;
  }
  if (out.lexicon.terms.empty()) {
    out.warnings.push_back("lexicon " + (out.lexicon.name.empty() ? "<unnamed>" : out.lexicon.name) +
                           " contains no terms");
  }
  return out;
}

double LabelCountReport::share(EntityLabel l) const noexcept {
  if (total == 0) return 0.0;
  return static_cast<double>(counts[index_of(l)]) / static_cast<double>(total);
}

std::vector<EntityLabel> LabelCountReport::ordered() const {
  std::vector<EntityLabel> out(kAllLabels.begin(), kAllLabels.end());
  std::stable_sort(out.begin(), out.end(), [&](EntityLabel a, EntityLabel b) {
    if (counts[index_of(a)] != counts[index_of(b)]) return counts[index_of(a)] > counts[index_of(b)];
    return label_name(a) < label_name(b);
  });
  return out;
}

LabelCountReport label_counts(const CorpusFile& c) {
  LabelCountReport r;
  for (const auto& d : c.documents) {
    for (const auto& m : d.mentions) ++r.counts[index_of(m.label)];
    r.total += d.mentions.size();
  }
  return r;
}

std::string render_label_counts(const LabelCountReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "label" << std::right << std::setw(8) << "count" << '\n';
  for (EntityLabel l : r.ordered()) {
    os << std::left << std::setw(24) << label_name(l) << std::right << std::setw(8)
       << r.counts[index_of(l)] << '\n';
  }
  os << std::left << std::setw(24) << "total" << std::right << std::setw(8) << r.total << '\n';
  return os.str();
}

std::string label_counts_json(const LabelCountReport& r) {
  ojson root;
  root["total"] = r.total;
  ojson labels = ojson::array();
  for (EntityLabel l : r.ordered()) {
    ojson row;
    row["label"] = std::string(label_name(l));
    row["count"] = r.counts[index_of(l)];
    row["share"] = r.share(l);
    labels.push_back(std::move(row));
  }
  root["labels"] = std::move(labels);
  return root.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw std::runtime_error("error reading '" + path + "'");
  return os.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

}  // namespace biorefine
