#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <tuple>

#include "biorefine/text.hpp"

using namespace biorefine;

namespace testsupport {

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

EntityLabel random_label(Rng& rng) { return kAllLabels[uniform(rng, 0, kLabelCount - 1)]; }

namespace {

const std::vector<std::string> kWords = {
    "gut",   "flora",  "IL-6",  "TNF-α", "café",   "β-cell", "microbiota", "the",   "of",
    "and",   "rats",   "Dopamine", "levels", "naïve", "mice", "ω-3",       "Über",  "in",
    "Lactobacillus", "obesity", "(", ")", ",", ".", "DJ-1", "ΑΒΓ", "x"};

}  // namespace

std::string random_text(Rng& rng, std::size_t min_words, std::size_t max_words) {
  const std::size_t n = uniform(rng, min_words, max_words);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kWords[uniform(rng, 0, kWords.size() - 1)];
  }
  return out;
}

std::string cp_slice(const std::string& s, std::size_t b, std::size_t e) {
  const std::u32string cps = text::decode(s);
  return text::encode(std::u32string_view(cps).substr(b, e - b));
}

std::size_t cp_len(const std::string& s) { return text::decode(s).size(); }

namespace {

EntityMention random_field_mention(Rng& rng, const Document& d) {
  const std::size_t tlen = cp_len(d.title);
  const std::size_t alen = cp_len(d.abstract);
  const bool use_title = alen == 0 || (tlen > 0 && uniform(rng, 0, 1) == 0);
  const std::string& field = use_title ? d.title : d.abstract;
  const std::size_t len = use_title ? tlen : alen;
  const std::size_t b = uniform(rng, 0, len - 1);
  const std::size_t e = uniform(rng, b + 1, std::min(len, b + 12));
  EntityMention m;
  m.start_idx = b;
  m.end_idx = e;
  m.text_span = cp_slice(field, b, e);
  m.label = random_label(rng);
  m.location = use_title ? Location::Title : Location::Abstract;
  return m;
}

}  // namespace

AnnotatedDocument random_per_field_document(Rng& rng, const std::string& doc_id,
                                            std::size_t max_mentions, const std::string& joiner) {
  AnnotatedDocument d;
  d.document.doc_id = doc_id;
  d.document.title = random_text(rng, 1, 8);
  d.document.abstract = uniform(rng, 0, 9) == 0 ? std::string() : random_text(rng, 1, 30);
  d.joiner = joiner;
  const std::size_t n = uniform(rng, 0, max_mentions);
  for (std::size_t i = 0; i < n; ++i) d.mentions.push_back(random_field_mention(rng, d.document));
  return d;
}

CorpusPair random_corpus_pair(Rng& rng, std::size_t max_docs, std::size_t max_mentions) {
  CorpusPair out;
  out.gold.provenance = Provenance::Gold;
  out.pred.provenance = Provenance::Prediction;
  const std::size_t docs = uniform(rng, 0, max_docs);
  for (std::size_t i = 0; i < docs; ++i) {
    AnnotatedDocument g = random_per_field_document(rng, "doc" + std::to_string(i), max_mentions);
    // Occasional identical gold duplicates.
    if (!g.mentions.empty() && g.mentions.size() < max_mentions && uniform(rng, 0, 4) == 0) {
      g.mentions.push_back(g.mentions[uniform(rng, 0, g.mentions.size() - 1)]);
    }
    AnnotatedDocument p = g;
    p.mentions.clear();
    for (const auto& m : g.mentions) {
      if (p.mentions.size() >= max_mentions) break;
      const std::size_t roll = uniform(rng, 0, 9);
      EntityMention c = m;
      if (roll < 5) {
        p.mentions.push_back(c);
      } else if (roll == 5) {
        const std::string& field = m.location == Location::Title ? g.document.title
                                                                  : g.document.abstract;
        if (c.end_idx < cp_len(field)) {
          ++c.end_idx;
          c.text_span = cp_slice(field, c.start_idx, c.end_idx);
        }
        p.mentions.push_back(c);
      } else if (roll == 6) {
        c.label = random_label(rng);
        p.mentions.push_back(c);
      } else if (roll == 7 && p.mentions.size() + 2 <= max_mentions) {
        p.mentions.push_back(c);
        p.mentions.push_back(c);
      }
    }
    const std::size_t extra = uniform(rng, 0, 3);
    for (std::size_t k = 0; k < extra && p.mentions.size() < max_mentions; ++k) {
      p.mentions.push_back(random_field_mention(rng, g.document));
    }
    for (auto& m : p.mentions) {
      if (uniform(rng, 0, 1)) m.score = uniform_real(rng, 0.0, 1.0);
    }
    std::shuffle(p.mentions.begin(), p.mentions.end(), rng);
    out.gold.documents.push_back(std::move(g));
    if (uniform(rng, 0, 9) != 0) out.pred.documents.push_back(std::move(p));
  }
  std::shuffle(out.pred.documents.begin(), out.pred.documents.end(), rng);
  return out;
}

namespace {

struct Segment {
  std::string text;
  std::vector<EntityLabel> likely;  // labels a model might give it
};

const std::vector<Segment>& segments() {
  using L = EntityLabel;
  static const std::vector<Segment> s = {
      {"bacteria", {L::Bacteria, L::Microbiome}},
      {"Bacteria", {L::Bacteria}},
      {"Dietary Supplement", {L::DietarySupplement, L::Food}},
      {"dietary_supplement", {L::DietarySupplement}},
      {"DDF", {L::DDF}},
      {"IL-6", {L::Chemical, L::Gene, L::Drug}},
      {"TNF-α", {L::Chemical, L::Gene}},
      {"DJ-1", {L::Gene, L::Chemical}},
      {"saline", {L::Gene, L::Chemical, L::Drug}},
      {"NNSs", {L::DietarySupplement, L::Food}},
      {"NS9", {L::Food, L::Drug, L::DietarySupplement}},
      {"LCHF", {L::DietarySupplement, L::Food}},
      {"dopamine", {L::Chemical, L::Gene}},
      {"transporter", {L::Chemical, L::Gene}},
      {"gut", {L::Microbiome, L::AnatomicalLocation}},
      {"microbiota", {L::Microbiome}},
      {"of", {L::Chemical}},
      {"and", {L::Gene}},
      {"the", {L::Food}},
      {"-", {L::Chemical}},
      {"rats", {L::Animal}},
      {"patients", {L::Human}},
      {"reduced", {L::DDF}},
      {"café", {L::Food}},
  };
  return s;
}

// A field of random segments; returns the text and segment code-point ranges.
std::string build_field(Rng& rng, std::size_t n,
                        std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>& ranges) {
  std::string out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) {
      // Mostly spaces, sometimes nothing or a hyphen-ish glue.
      const std::size_t g = uniform(rng, 0, 9);
      const std::string glue = g < 7 ? " " : g < 9 ? "  " : "-";
      out += glue;
      pos += cp_len(glue);
    }
    const std::size_t k = uniform(rng, 0, segments().size() - 1);
    const std::string& t = segments()[k].text;
    ranges.emplace_back(pos, pos + cp_len(t), k);
    out += t;
    pos += cp_len(t);
  }
  return out;
}

}  // namespace

CorpusFile random_prediction_corpus(Rng& rng, std::size_t max_docs, std::size_t max_mentions) {
  CorpusFile c;
  c.provenance = Provenance::Prediction;
  const std::size_t docs = uniform(rng, 0, max_docs);
  for (std::size_t i = 0; i < docs; ++i) {
    AnnotatedDocument d;
    d.coordinate_space = CoordinateSpace::Combined;
    d.joiner = uniform(rng, 0, 1) ? "" : " ";
    d.document.doc_id = "p" + std::to_string(i);
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> tr, ar;
    d.document.title = build_field(rng, uniform(rng, 1, 8), tr);
    d.document.abstract = uniform(rng, 0, 7) == 0 ? std::string() : build_field(rng, uniform(rng, 1, 20), ar);
    const std::size_t shift = cp_len(d.document.title) + cp_len(d.joiner);
    const std::string combined = d.document.title + d.joiner + d.document.abstract;

    const std::size_t n = uniform(rng, 0, max_mentions);
    for (std::size_t k = 0; k < n; ++k) {
      const bool title = ar.empty() || uniform(rng, 0, 2) == 0;
      const auto& ranges = title ? tr : ar;
      const std::size_t base = title ? 0 : shift;
      // One or two consecutive segments.
      const std::size_t a = uniform(rng, 0, ranges.size() - 1);
      const std::size_t b = std::min(ranges.size() - 1, a + (uniform(rng, 0, 4) == 0 ? 1 : 0));
      EntityMention m;
      m.start_idx = base + std::get<0>(ranges[a]);
      m.end_idx = base + std::get<1>(ranges[b]);
      m.text_span = cp_slice(combined, m.start_idx, m.end_idx);
      const auto& likely = segments()[std::get<2>(ranges[a])].likely;
      m.label = uniform(rng, 0, 4) == 0 ? random_label(rng) : likely[uniform(rng, 0, likely.size() - 1)];
      m.location = title ? Location::Title : Location::Abstract;
      if (uniform(rng, 0, 3) != 0) m.score = uniform_real(rng, 0.0, 1.0);
      d.mentions.push_back(std::move(m));
    }
    std::sort(d.mentions.begin(), d.mentions.end(), [](const auto& x, const auto& y) {
      return std::tie(x.start_idx, x.end_idx) < std::tie(y.start_idx, y.end_idx);
    });
    c.documents.push_back(std::move(d));
  }
  return c;
}

LexiconSet seed_lexicons() {
  using L = EntityLabel;
  return LexiconSet({
      {"KNOWN_GENES", {"il-6", "tnf-α", "secretory iga", "dopamine transporter"}, L::Gene, {L::Chemical}},
      {"KNOWN_CHEMICALS", {"dj-1", "saline", "curli"}, L::Chemical, {L::Gene}},
      {"KNOWN_FOOD",
       {"nonnutritive sweeteners", "nnss", "low-carbohydrate high-fat diets", "lchf"},
       L::Food,
       {L::DietarySupplement}},
      {"KNOWN_DIETARY_SUPPLEMENTS", {"ns9"}, L::DietarySupplement, {L::Food, L::Drug}},
  });
}

std::size_t kuhn_matching(const std::vector<EntityMention>& gold,
                          const std::vector<EntityMention>& pred) {
  const auto same = [](const EntityMention& a, const EntityMention& b) {
    return a.start_idx == b.start_idx && a.end_idx == b.end_idx && a.label == b.label;
  };
  std::vector<long> owner(gold.size(), -1);
  std::function<bool(std::size_t, std::vector<char>&)> augment =
      [&](std::size_t p, std::vector<char>& seen) {
        for (std::size_t g = 0; g < gold.size(); ++g) {
          if (seen[g] || !same(pred[p], gold[g])) continue;
          seen[g] = 1;
          if (owner[g] < 0 || augment(static_cast<std::size_t>(owner[g]), seen)) {
            owner[g] = static_cast<long>(p);
            return true;
          }
        }
        return false;
      };
  std::size_t matched = 0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    std::vector<char> seen(gold.size(), 0);
    if (augment(p, seen)) ++matched;
  }
  return matched;
}

namespace {

void prf(std::size_t tp, std::size_t fp, std::size_t fn, double& p, double& r, double& f) {
  p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

OracleReport oracle_evaluate(const CorpusFile& gold, const CorpusFile& pred,
                             eval::MacroPolicy policy) {
  OracleReport out;
  for (const auto& g : gold.documents) {
    const AnnotatedDocument* p = nullptr;
    for (const auto& cand : pred.documents) {
      if (cand.document.doc_id == g.document.doc_id) p = &cand;
    }
    for (std::size_t li = 0; li < kLabelCount; ++li) {
      std::vector<EntityMention> gl, pl;
      for (const auto& m : g.mentions) {
        if (index_of(m.label) == li) gl.push_back(m);
      }
      if (p) {
        for (const auto& m : p->mentions) {
          if (index_of(m.label) == li) pl.push_back(m);
        }
      }
      const std::size_t tp = kuhn_matching(gl, pl);
      out.counts[li].tp += tp;
      out.counts[li].fp += pl.size() - tp;
      out.counts[li].fn += gl.size() - tp;
    }
  }
  for (const auto& c : out.counts) out.pooled += c;
  prf(out.pooled.tp, out.pooled.fp, out.pooled.fn, out.micro_p, out.micro_r, out.micro_f);
  double sp = 0, sr = 0, sf = 0;
  std::size_t n = 0;
  for (const auto& c : out.counts) {
    if (policy == eval::MacroPolicy::PresentOnly && c.tp + c.fp + c.fn == 0) continue;
    double p, r, f;
    prf(c.tp, c.fp, c.fn, p, r, f);
    sp += p;
    sr += r;
    sf += f;
    ++n;
  }
  if (n) {
    out.macro_p = sp / static_cast<double>(n);
    out.macro_r = sr / static_cast<double>(n);
    out.macro_f = sf / static_cast<double>(n);
  }
  return out;
}

double oracle_path_score(const crf::ChainShape& shape, std::span<const double> w,
                         const crf::FeatureSequence& x, const std::vector<std::size_t>& y) {
  const std::size_t F = shape.features();
  const std::size_t L = shape.labels();
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (auto f : x[t]) s += w[f * L + y[t]];
    if (t > 0) s += w[F * L + y[t - 1] * L + y[t]];
  }
  return s;
}

Enumeration enumerate(const crf::ChainShape& shape, std::span<const double> w,
                      const crf::FeatureSequence& x) {
  const std::size_t T = x.size();
  const std::size_t L = shape.labels();
  std::vector<std::size_t> y(T, 0);
  std::vector<double> scores;
  Enumeration out;
  out.best_score = -std::numeric_limits<double>::infinity();
  while (true) {
    const double s = oracle_path_score(shape, w, x, y);
    scores.push_back(s);
    if (s > out.best_score) {
      out.best_score = s;
      out.best_path = y;
    }
    // Odometer step, last position fastest, so paths come in lexicographic order.
    bool wrapped = true;
    for (std::size_t t = T; t-- > 0;) {
      if (++y[t] < L) {
        wrapped = false;
        break;
      }
      y[t] = 0;
    }
    if (wrapped) break;
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  long double acc = 0.0L;
  for (double s : scores) acc += std::exp(static_cast<long double>(s - mx));
  out.log_z = mx + static_cast<double>(std::log(acc));
  return out;
}

RandomChain random_chain(Rng& rng, std::size_t features, std::size_t labels, std::size_t length,
                         double scale) {
  RandomChain c;
  c.shape = crf::ChainShape(features, labels);
  c.weights.resize(c.shape.size());
  for (auto& v : c.weights) v = uniform_real(rng, -scale, scale);
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<crf::FeatureId> fs;
    const std::size_t k = uniform(rng, 1, std::min<std::size_t>(features, 4));
    while (fs.size() < k) {
      const auto f = static_cast<crf::FeatureId>(uniform(rng, 0, features - 1));
      if (std::find(fs.begin(), fs.end(), f) == fs.end()) fs.push_back(f);
    }
    std::sort(fs.begin(), fs.end());
    c.x.push_back(std::move(fs));
  }
  return c;
}

namespace {

struct Piece {
  std::string text;
  std::optional<EntityLabel> label;
};

}  // namespace

CorpusFile overfit_corpus() {
  using L = EntityLabel;
  const std::vector<Piece> entities = {
      {"aspirin", L::Drug},          {"butyrate", L::Chemical},
      {"obesity", L::DDF},           {"IL-6", L::Gene},
      {"mice", L::Animal},           {"patients", L::Human},
      {"hippocampus", L::AnatomicalLocation},
      {"yogurt", L::Food},           {"lactobacillus", L::Bacteria},
      {"gut microbiota", L::Microbiome},
      {"dietary fiber", L::DietarySupplement},
      {"regression", L::StatisticalTechnique},
      {"sequencing", L::BiomedicalTechnique},
  };
  const auto pick = [&](std::size_t i) { return entities[i % entities.size()]; };

  CorpusFile c;
  c.provenance = Provenance::Gold;
  for (std::size_t d = 0; d < 10; ++d) {
    AnnotatedDocument doc;
    doc.document.doc_id = "fit" + std::to_string(d);
    std::vector<std::pair<std::vector<Piece>, bool>> fields = {
        {{{"Effects of", {}}, pick(d), {"on", {}}, pick(d + 5)}, true},
        {{{"We measured", {}}, pick(d + 3), {"levels in", {}}, pick(d + 7),
          {"after", {}}, pick(d + 11), {"treatment.", {}}},
         false},
    };
    for (auto& [pieces, is_title] : fields) {
      std::string& field = is_title ? doc.document.title : doc.document.abstract;
      for (const auto& p : pieces) {
        if (!field.empty()) field += ' ';
        const std::size_t b = cp_len(field);
        field += p.text;
        if (p.label) {
          EntityMention m;
          m.start_idx = b;
          m.end_idx = cp_len(field);
          m.text_span = p.text;
          m.label = *p.label;
          m.location = is_title ? Location::Title : Location::Abstract;
          doc.mentions.push_back(m);
        }
      }
    }
    c.documents.push_back(std::move(doc));
  }
  return c;
}

}  // namespace testsupport

namespace testsupport {

CorpusFile dev_shaped_corpus() {
  using L = EntityLabel;
  const std::vector<std::pair<L, std::size_t>> profile = {
      {L::DDF, 379},         {L::Chemical, 131},          {L::Microbiome, 127},
      {L::Drug, 60},         {L::Gene, 39},               {L::Bacteria, 70},
      {L::AnatomicalLocation, 65}, {L::Human, 55},        {L::BiomedicalTechnique, 50},
      {L::Animal, 45},       {L::DietarySupplement, 40},  {L::Food, 33},
      {L::StatisticalTechnique, 23},
  };
  std::vector<L> labels;
  for (auto [l, n] : profile) labels.insert(labels.end(), n, l);

  CorpusFile c;
  c.provenance = Provenance::Gold;
  for (std::size_t d = 0; d < 40; ++d) {
    AnnotatedDocument doc;
    doc.document.doc_id = std::to_string(36000000 + d);
    doc.document.title = "Document " + std::to_string(d);
    c.documents.push_back(std::move(doc));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    AnnotatedDocument& doc = c.documents[i % 40];
    std::string& a = doc.document.abstract;
    if (!a.empty()) a += ' ';
    const std::string word = "e" + std::to_string(i);
    EntityMention m;
    m.start_idx = cp_len(a);
    a += word;
    m.end_idx = cp_len(a);
    m.text_span = word;
    m.label = labels[i];
    m.location = Location::Abstract;
    doc.mentions.push_back(std::move(m));
  }
  return c;
}

}  // namespace testsupport
