#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "biorefine/crf/bio.hpp"
#include "biorefine/crf/chain.hpp"
#include "biorefine/crf/features.hpp"

namespace biorefine::crf {

struct TrainConfig {
  double l2 = 1.0;
  std::size_t max_iterations = 200;
  double tolerance = 1e-4;  // on the gradient 2-norm
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  // Magnitude of the seeded uniform initial weights.
  double init_scale = 1e-3;
  unsigned threads = 1;

  void validate() const;  // throws std::invalid_argument
};

struct TrainStats {
  std::size_t iterations = 0;
  std::size_t rejected_steps = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  // Objective after every accepted step, starting with the initial point.
  std::vector<double> history;
};

struct CrfModel {
  std::vector<BioLabel> labels;  // index order = weight order
  FeatureIndex features;
  std::vector<double> weights;
  TrainConfig config;
  TrainStats stats;

  ChainShape shape() const { return {features.size(), labels.size()}; }

  // Label indices of the best path for one sentence.
  std::vector<BioLabel> decode(std::span<const Token> sentence) const;

  bool operator==(const CrfModel& o) const;
};

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kModelFormat = "biorefine-crf";
inline constexpr int kModelVersion = 1;

std::string save_model(const CrfModel& m);
CrfModel load_model(std::string_view bytes);  // throws ModelFormatError

struct TrainingSentence {
  std::vector<Token> tokens;  // POS filled
  std::vector<BioLabel> labels;
};

// Full-batch ascent with per-coordinate adaptive steps (AdaGrad). A step that
// lowers the objective is rejected and the step size halved, so accepted
// objectives are non-decreasing. Throws std::invalid_argument for an empty
// corpus and DivergenceError on non-finite values.
CrfModel train(std::span<const TrainingSentence> corpus, const TrainConfig& config);

// Lower-level entry point used by train(): optimizes `weights` in place.
TrainStats optimize(const ChainShape& shape, std::vector<double>& weights,
                    std::span<const LabeledSequence> batch, const TrainConfig& config);

}  // namespace biorefine::crf
