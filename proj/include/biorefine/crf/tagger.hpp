#pragma once

// Document-level glue: sentences from a document, training data from an
// annotated corpus, and span prediction with a trained model.

#include <vector>

#include "biorefine/corpus.hpp"
#include "biorefine/crf/bio.hpp"
#include "biorefine/crf/model.hpp"
#include "biorefine/crf/tokenize.hpp"
#include "biorefine/io.hpp"

namespace biorefine::crf {

struct TaggingOptions {
  const PosProvider* pos = nullptr;      // RulePosTagger when null
  const PosSidecar* sidecar = nullptr;   // applied before `pos`
};

// Title and abstract are tokenized separately so no token crosses the field
// boundary; offsets are in combined-text code points for `joiner`.
std::vector<std::vector<Token>> document_sentences(const Document& doc, std::string_view joiner,
                                                   const TaggingOptions& options = {});

struct TrainingData {
  std::vector<TrainingSentence> sentences;
  std::size_t misaligned = 0;
  std::size_t overlaps_dropped = 0;
};

TrainingData build_training_data(const CorpusFile& corpus, const TaggingOptions& options = {});

// Combined-space prediction with assigned t/a tags.
AnnotatedDocument predict_spans(const CrfModel& model, const Document& doc,
                                std::string_view joiner, const TaggingOptions& options = {});

CorpusFile predict_corpus(const CrfModel& model, const CorpusFile& corpus,
                          const TaggingOptions& options = {});

}  // namespace biorefine::crf
