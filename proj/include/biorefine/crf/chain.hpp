#pragma once

// Linear-chain CRF numerics over a flat weight vector.
//
//   score(x, y) = sum_t sum_{f in x_t} W[f, y_t] + sum_{t>0} T[y_{t-1}, y_t]
//   p(y | x)    = exp(score(x, y) - log Z(x))
//
// Layout: W[f, y] at f * L + y, then T[a, b] at F * L + a * L + b.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "biorefine/crf/features.hpp"

namespace biorefine::crf {

double log_sum_exp(std::span<const double> xs) noexcept;
double log_sum_exp(double a, double b) noexcept;

// Row-major T x L table.
struct Table {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Table() = default;
  Table(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
};

class ChainShape {
 public:
  ChainShape(std::size_t num_features, std::size_t num_labels)
      : features_(num_features), labels_(num_labels) {}

  std::size_t features() const noexcept { return features_; }
  std::size_t labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return features_ * labels_ + labels_ * labels_; }
  std::size_t emission(std::size_t f, std::size_t y) const noexcept { return f * labels_ + y; }
  std::size_t transition(std::size_t a, std::size_t b) const noexcept {
    return features_ * labels_ + a * labels_ + b;
  }

 private:
  std::size_t features_;
  std::size_t labels_;
};

// Per-position label scores from emission weights.
Table emission_scores(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x);

double path_score(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x,
                  std::span<const std::size_t> y);

struct ForwardResult {
  Table alpha;  // alpha(t, y) = log sum over prefixes ending in y at t
  double log_z = 0.0;
};

struct BackwardResult {
  Table beta;  // beta(t, y) = log sum over suffixes after y at t
  double log_z = 0.0;
};

ForwardResult log_forward(const ChainShape& shape, std::span<const double> w,
                          const FeatureSequence& x);
BackwardResult log_backward(const ChainShape& shape, std::span<const double> w,
                            const FeatureSequence& x);

// Position-wise marginals p(y_t = y | x).
Table node_marginals(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x);

struct ViterbiResult {
  std::vector<std::size_t> path;
  double score = 0.0;
};

// Ties are broken towards the lowest label index.
ViterbiResult viterbi(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x);

struct LabeledSequence {
  FeatureSequence features;
  std::vector<std::size_t> labels;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Objective {
  double value = 0.0;
  std::vector<double> gradient;
};

// value = sum log p(y|x) - (l2 / 2) |w|^2, with its gradient. Sequences are
// summed in fixed contiguous chunks, optionally on `threads` workers; the
// result does not depend on the thread count. Throws DivergenceError on a
// non-finite intermediate.
Objective log_likelihood_and_gradient(const ChainShape& shape, std::span<const double> w,
                                      std::span<const LabeledSequence> batch, double l2,
                                      unsigned threads = 1);

}  // namespace biorefine::crf
