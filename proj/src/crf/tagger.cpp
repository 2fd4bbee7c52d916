#include "biorefine/crf/tagger.hpp"

#include "biorefine/text.hpp"

namespace biorefine::crf {

std::vector<std::vector<Token>> document_sentences(const Document& doc, std::string_view joiner,
                                                   const TaggingOptions& options) {
  const RulePosTagger fallback;
  const PosProvider& pos = options.pos ? *options.pos : fallback;
  const CombinedText ct = combine_text(doc, joiner);

  std::vector<std::vector<Token>> out;
  const auto add_field = [&](std::string_view field, std::size_t offset) {
    std::vector<Token> tokens = tokenize(field, offset);
    if (options.sidecar) options.sidecar->apply(doc.doc_id, tokens);
    for (auto [b, e] : split_sentences(tokens)) {
      std::vector<Token> sentence(tokens.begin() + static_cast<std::ptrdiff_t>(b),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(e));
      pos.tag(sentence);
      out.push_back(std::move(sentence));
    }
  };
  add_field(doc.title, 0);
  add_field(doc.abstract, ct.abstract_shift());
  return out;
}

TrainingData build_training_data(const CorpusFile& corpus, const TaggingOptions& options) {
  TrainingData out;
  for (const AnnotatedDocument& d : corpus.documents) {
    const AnnotatedDocument combined = to_combined(d);
    for (auto& sentence : document_sentences(d.document, d.joiner, options)) {
      if (sentence.empty()) continue;
      const std::size_t lo = sentence.front().start_idx;
      const std::size_t hi = sentence.back().end_idx;
      std::vector<EntityMention> local;
      for (const auto& m : combined.mentions) {
        if (m.start_idx < hi && lo < m.end_idx) local.push_back(m);
      }
      BioEncoding enc = spans_to_bio(local, sentence);
      out.misaligned += enc.misaligned;
      out.overlaps_dropped += enc.overlaps_dropped;
      out.sentences.push_back({std::move(sentence), std::move(enc.labels)});
    }
  }
  return out;
}

AnnotatedDocument predict_spans(const CrfModel& model, const Document& doc,
                                std::string_view joiner, const TaggingOptions& options) {
  AnnotatedDocument out;
  out.document = doc;
  out.coordinate_space = CoordinateSpace::Combined;
  out.joiner = std::string(joiner);
  const CombinedText ct = combine_text(doc, joiner);
  const text::IndexedText combined(ct.combined);
  for (const auto& sentence : document_sentences(doc, joiner, options)) {
    const std::vector<BioLabel> labels = model.decode(sentence);
    for (EntityMention& m : bio_to_spans(combined, sentence, labels)) {
      m.location = assign_tag(m, ct.title_len);
      out.mentions.push_back(std::move(m));
    }
  }
  return out;
}

CorpusFile predict_corpus(const CrfModel& model, const CorpusFile& corpus,
                          const TaggingOptions& options) {
  CorpusFile out;
  out.provenance = Provenance::Prediction;
  for (const auto& d : corpus.documents) {
    out.documents.push_back(predict_spans(model, d.document, d.joiner, options));
  }
  return out;
}

}  // namespace biorefine::crf
