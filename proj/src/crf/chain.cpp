#include "biorefine/crf/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace biorefine::crf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kChunks = 4;

void check_sequence(const FeatureSequence& x) {
  if (x.empty()) throw std::invalid_argument("CRF sequence must have at least one position");
}

struct ChunkResult {
  double log_likelihood = 0.0;
  std::vector<double> gradient;  // empirical minus expected counts
};

void accumulate_sequence(const ChainShape& shape, std::span<const double> w,
                         const LabeledSequence& s, ChunkResult& out) {
  const std::size_t T = s.features.size();
  const std::size_t L = shape.labels();
  if (s.labels.size() != T) {
    throw std::invalid_argument("sequence has " + std::to_string(T) + " positions but " +
                                std::to_string(s.labels.size()) + " labels");
  }
  const Table em = emission_scores(shape, w, s.features);
  const ForwardResult fwd = log_forward(shape, w, s.features);
  const BackwardResult bwd = log_backward(shape, w, s.features);
  const double log_z = fwd.log_z;
  const double gold = path_score(shape, w, s.features, s.labels);
  if (!std::isfinite(log_z) || !std::isfinite(gold)) {
    throw DivergenceError("non-finite log partition (" + std::to_string(log_z) +
                          ") or gold score (" + std::to_string(gold) + ")");
  }
  out.log_likelihood += gold - log_z;

  auto& g = out.gradient;
  for (std::size_t t = 0; t < T; ++t) {
    for (FeatureId f : s.features[t]) g[shape.emission(f, s.labels[t])] += 1.0;
    if (t > 0) g[shape.transition(s.labels[t - 1], s.labels[t])] += 1.0;
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      const double p = std::exp(fwd.alpha(t, y) + bwd.beta(t, y) - log_z);
      if (p == 0.0) continue;
      for (FeatureId f : s.features[t]) g[shape.emission(f, y)] -= p;
    }
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t a = 0; a < L; ++a) {
      const double left = fwd.alpha(t - 1, a) - log_z;
      for (std::size_t b = 0; b < L; ++b) {
        const double p =
            std::exp(left + w[shape.transition(a, b)] + em(t, b) + bwd.beta(t, b));
        g[shape.transition(a, b)] -= p;
      }
    }
  }
}

}  // namespace

double log_sum_exp(std::span<const double> xs) noexcept {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_sum_exp(double a, double b) noexcept {
  if (a < b) std::swap(a, b);
  if (a == kNegInf) return kNegInf;
  if (!std::isfinite(a)) return a;
  return a + std::log1p(std::exp(b - a));
}

Table emission_scores(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x) {
  const std::size_t L = shape.labels();
  Table em(x.size(), L);
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (FeatureId f : x[t]) {
      const double* row = w.data() + shape.emission(f, 0);
      for (std::size_t y = 0; y < L; ++y) em(t, y) += row[y];
    }
  }
  return em;
}

double path_score(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x,
                  std::span<const std::size_t> y) {
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (FeatureId f : x[t]) s += w[shape.emission(f, y[t])];
    if (t > 0) s += w[shape.transition(y[t - 1], y[t])];
  }
  return s;
}

ForwardResult log_forward(const ChainShape& shape, std::span<const double> w,
                          const FeatureSequence& x) {
  check_sequence(x);
  const std::size_t T = x.size();
  const std::size_t L = shape.labels();
  const Table em = emission_scores(shape, w, x);
  ForwardResult r{Table(T, L), 0.0};
  std::vector<double> terms(L);
  for (std::size_t y = 0; y < L; ++y) r.alpha(0, y) = em(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t a = 0; a < L; ++a) terms[a] = r.alpha(t - 1, a) + w[shape.transition(a, y)];
      r.alpha(t, y) = log_sum_exp(terms) + em(t, y);
    }
  }
  for (std::size_t y = 0; y < L; ++y) terms[y] = r.alpha(T - 1, y);
  r.log_z = log_sum_exp(terms);
  return r;
}

BackwardResult log_backward(const ChainShape& shape, std::span<const double> w,
                            const FeatureSequence& x) {
  check_sequence(x);
  const std::size_t T = x.size();
  const std::size_t L = shape.labels();
  const Table em = emission_scores(shape, w, x);
  BackwardResult r{Table(T, L), 0.0};
  std::vector<double> terms(L);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t b = 0; b < L; ++b) {
        terms[b] = w[shape.transition(y, b)] + em(t + 1, b) + r.beta(t + 1, b);
      }
      r.beta(t, y) = log_sum_exp(terms);
    }
  }
  for (std::size_t y = 0; y < L; ++y) terms[y] = em(0, y) + r.beta(0, y);
  r.log_z = log_sum_exp(terms);
  return r;
}

Table node_marginals(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x) {
  const ForwardResult fwd = log_forward(shape, w, x);
  const BackwardResult bwd = log_backward(shape, w, x);
  Table p(x.size(), shape.labels());
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (std::size_t y = 0; y < shape.labels(); ++y) {
      p(t, y) = std::exp(fwd.alpha(t, y) + bwd.beta(t, y) - fwd.log_z);
    }
  }
  return p;
}

ViterbiResult viterbi(const ChainShape& shape, std::span<const double> w, const FeatureSequence& x) {
  check_sequence(x);
  const std::size_t T = x.size();
  const std::size_t L = shape.labels();
  const Table em = emission_scores(shape, w, x);
  Table delta(T, L);
  std::vector<std::size_t> back(T * L, 0);
  for (std::size_t y = 0; y < L; ++y) delta(0, y) = em(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t best = 0;
      double best_score = delta(t - 1, 0) + w[shape.transition(0, y)];
      for (std::size_t a = 1; a < L; ++a) {
        const double s = delta(t - 1, a) + w[shape.transition(a, y)];
        if (s > best_score) {
          best_score = s;
          best = a;
        }
      }
      delta(t, y) = best_score + em(t, y);
      back[t * L + y] = best;
    }
  }
  ViterbiResult r;
  r.path.assign(T, 0);
  std::size_t last = 0;
  for (std::size_t y = 1; y < L; ++y) {
    if (delta(T - 1, y) > delta(T - 1, last)) last = y;
  }
  r.score = delta(T - 1, last);
  r.path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) r.path[t - 1] = back[t * L + r.path[t]];
  return r;
}

Objective log_likelihood_and_gradient(const ChainShape& shape, std::span<const double> w,
                                      std::span<const LabeledSequence> batch, double l2,
                                      unsigned threads) {
  if (w.size() != shape.size()) {
    throw std::invalid_argument("weight vector has " + std::to_string(w.size()) +
                                " entries, shape needs " + std::to_string(shape.size()));
  }
  const std::size_t n = batch.size();
  const std::size_t chunks = std::min<std::size_t>(kChunks, std::max<std::size_t>(n, 1));
  std::vector<ChunkResult> parts(chunks);
  std::vector<std::exception_ptr> errors(chunks);

  auto run_chunk = [&](std::size_t c) {
    try {
      parts[c].gradient.assign(shape.size(), 0.0);
      const std::size_t lo = n * c / chunks;
      const std::size_t hi = n * (c + 1) / chunks;
      for (std::size_t i = lo; i < hi; ++i) accumulate_sequence(shape, w, batch[i], parts[c]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (workers == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < workers; ++k) {
      pool.emplace_back([&, k] {
        for (std::size_t c = k; c < chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Objective out;
  out.gradient.assign(shape.size(), 0.0);
  for (const ChunkResult& part : parts) {
    out.value += part.log_likelihood;
    for (std::size_t i = 0; i < out.gradient.size(); ++i) out.gradient[i] += part.gradient[i];
  }
  double norm2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    norm2 += w[i] * w[i];
    out.gradient[i] -= l2 * w[i];
  }
  out.value -= 0.5 * l2 * norm2;
  if (!std::isfinite(out.value)) {
    throw DivergenceError("non-finite objective " + std::to_string(out.value));
  }
  return out;
}

}  // namespace biorefine::crf
