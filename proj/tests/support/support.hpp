#pragma once

// Random fixtures and independent reference implementations shared by the
// unit and acceptance tests. The oracles deliberately avoid the library's
// own algorithms.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "biorefine/corpus.hpp"
#include "biorefine/crf/chain.hpp"
#include "biorefine/crf/model.hpp"
#include "biorefine/evaluation.hpp"
#include "biorefine/io.hpp"
#include "biorefine/lexicon.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive
double uniform_real(Rng& rng, double lo, double hi);
biorefine::EntityLabel random_label(Rng& rng);

// Whitespace-separated words drawn from a small vocabulary that includes
// non-ASCII letters.
std::string random_text(Rng& rng, std::size_t min_words, std::size_t max_words);

// Code-point slice of a UTF-8 string.
std::string cp_slice(const std::string& s, std::size_t b, std::size_t e);
std::size_t cp_len(const std::string& s);

// Per-field document with arbitrary (not token-aligned) valid mentions.
biorefine::AnnotatedDocument random_per_field_document(Rng& rng, const std::string& doc_id,
                                                       std::size_t max_mentions,
                                                       const std::string& joiner = "");

// Gold/prediction corpus pair over the same documents. Predictions copy,
// perturb, relabel, duplicate and invent mentions so every matching case
// shows up.
struct CorpusPair {
  biorefine::CorpusFile gold;
  biorefine::CorpusFile pred;
};
CorpusPair random_corpus_pair(Rng& rng, std::size_t max_docs, std::size_t max_mentions);

// Combined-space prediction corpus seeded with trivial spans, lexicon terms
// under their source labels, and adjacent same-label fragments.
biorefine::CorpusFile random_prediction_corpus(Rng& rng, std::size_t max_docs,
                                               std::size_t max_mentions);

// Lexicons with the seed terms and default routing.
biorefine::LexiconSet seed_lexicons();

// Maximum bipartite matching (Kuhn) between predictions and gold in one
// document, edges joining identical (start, end, label).
std::size_t kuhn_matching(const std::vector<biorefine::EntityMention>& gold,
                          const std::vector<biorefine::EntityMention>& pred);

struct OracleReport {
  biorefine::eval::PerLabelCounts counts{};
  biorefine::eval::MatchCounts pooled;
  double micro_p = 0, micro_r = 0, micro_f = 0;
  double macro_p = 0, macro_r = 0, macro_f = 0;
};
OracleReport oracle_evaluate(const biorefine::CorpusFile& gold, const biorefine::CorpusFile& pred,
                             biorefine::eval::MacroPolicy policy);

// CRF references by exhaustive enumeration over all label sequences.
double oracle_path_score(const biorefine::crf::ChainShape& shape, std::span<const double> w,
                         const biorefine::crf::FeatureSequence& x,
                         const std::vector<std::size_t>& y);
struct Enumeration {
  double log_z = 0.0;
  double best_score = 0.0;
  std::vector<std::size_t> best_path;  // lowest lexicographic among maxima
};
Enumeration enumerate(const biorefine::crf::ChainShape& shape, std::span<const double> w,
                      const biorefine::crf::FeatureSequence& x);

struct RandomChain {
  biorefine::crf::ChainShape shape{0, 0};
  std::vector<double> weights;
  biorefine::crf::FeatureSequence x;
};
RandomChain random_chain(Rng& rng, std::size_t features, std::size_t labels, std::size_t length,
                         double scale);

// Forty documents and 1,117 mentions with the development-set label profile:
// 379 DDF, 131 chemical, 127 microbiome, 60 drug, 39 gene; the remaining 381
// spread over the other labels.
biorefine::CorpusFile dev_shaped_corpus();

// Twenty short sentences whose entities are signalled by unambiguous words.
biorefine::CorpusFile overfit_corpus();

}  // namespace testsupport
