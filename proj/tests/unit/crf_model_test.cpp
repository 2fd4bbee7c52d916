#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "biorefine/crf/chain.hpp"
#include "biorefine/crf/model.hpp"
#include "biorefine/crf/tagger.hpp"
#include "support.hpp"

using namespace biorefine;
using namespace biorefine::crf;

TEST_CASE("log_sum_exp") {
  CHECK(log_sum_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_sum_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(-1000.0, -1000.0) == doctest::Approx(-1000.0 + std::log(2.0)));
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(ninf, 3.0) == 3.0);
  CHECK(log_sum_exp(ninf, ninf) == ninf);
  const std::vector<double> xs{1.0, 2.0, 3.0};
  CHECK(log_sum_exp(xs) == doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
  CHECK(log_sum_exp(std::vector<double>{}) == ninf);
}

TEST_CASE("uniform single position") {
  const ChainShape shape(1, 3);
  const std::vector<double> w(shape.size(), 0.0);
  const FeatureSequence x{{0}};
  CHECK(log_forward(shape, w, x).log_z == doctest::Approx(std::log(3.0)));
  CHECK(log_backward(shape, w, x).log_z == doctest::Approx(std::log(3.0)));
}

TEST_CASE("forward, backward and enumeration agree") {
  testsupport::Rng rng(17);
  for (int i = 0; i < 60; ++i) {
    const std::size_t L = testsupport::uniform(rng, 1, 4);
    const std::size_t T = testsupport::uniform(rng, 1, 6);
    const auto c = testsupport::random_chain(rng, 6, L, T, 2.0);
    const auto e = testsupport::enumerate(c.shape, c.weights, c.x);
    const double fz = log_forward(c.shape, c.weights, c.x).log_z;
    const double bz = log_backward(c.shape, c.weights, c.x).log_z;
    CHECK(std::abs(fz - e.log_z) <= 1e-10 * std::max(1.0, std::abs(e.log_z)));
    CHECK(std::abs(fz - bz) <= 1e-9);

    const Table marg = node_marginals(c.shape, c.weights, c.x);
    for (std::size_t t = 0; t < T; ++t) {
      double s = 0;
      for (std::size_t y = 0; y < L; ++y) s += marg(t, y);
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }

    const auto v = viterbi(c.shape, c.weights, c.x);
    CHECK(testsupport::oracle_path_score(c.shape, c.weights, c.x, v.path) == e.best_score);
    CHECK(v.path == e.best_path);
    CHECK(path_score(c.shape, c.weights, c.x, v.path) == doctest::Approx(e.best_score).epsilon(1e-12));
  }
}

TEST_CASE("viterbi tie-breaking") {
  const ChainShape shape(2, 3);
  std::vector<double> w(shape.size(), 0.0);
  const FeatureSequence x{{0}, {1}, {0}};
  auto v = viterbi(shape, w, x);
  CHECK(v.path == std::vector<std::size_t>{0, 0, 0});
  CHECK(v.score == 0.0);

  w[shape.emission(0, 2)] = 1.0;  // favour label 2 wherever feature 0 fires
  v = viterbi(shape, w, FeatureSequence{{0}});
  CHECK(v.path == std::vector<std::size_t>{2});
}

TEST_CASE("gradient matches finite differences") {
  testsupport::Rng rng(23);
  for (double l2 : {0.0, 0.1}) {
    for (int i = 0; i < 5; ++i) {
      const std::size_t L = testsupport::uniform(rng, 2, 4);
      auto c = testsupport::random_chain(rng, 5, L, 1, 0.5);
      std::vector<LabeledSequence> batch;
      for (int s = 0; s < 3; ++s) {
        auto seq = testsupport::random_chain(rng, 5, L, testsupport::uniform(rng, 1, 5), 0.5);
        std::vector<std::size_t> y;
        for (std::size_t t = 0; t < seq.x.size(); ++t) y.push_back(testsupport::uniform(rng, 0, L - 1));
        batch.push_back({seq.x, y});
      }
      const Objective obj = log_likelihood_and_gradient(c.shape, c.weights, batch, l2);
      const double h = 1e-5;
      for (std::size_t k = 0; k < c.weights.size(); ++k) {
        auto plus = c.weights;
        auto minus = c.weights;
        plus[k] += h;
        minus[k] -= h;
        const double fd = (log_likelihood_and_gradient(c.shape, plus, batch, l2).value -
                           log_likelihood_and_gradient(c.shape, minus, batch, l2).value) /
                          (2 * h);
        const double denom = std::max({1.0, std::abs(fd), std::abs(obj.gradient[k])});
        CHECK(std::abs(fd - obj.gradient[k]) / denom < 1e-5);
      }
    }
  }
}

TEST_CASE("objective at zero weights and linearity") {
  testsupport::Rng rng(4);
  const auto c = testsupport::random_chain(rng, 4, 3, 5, 1.0);
  const std::vector<double> zero(c.shape.size(), 0.0);
  const LabeledSequence seq{c.x, {0, 1, 2, 1, 0}};
  const auto one = log_likelihood_and_gradient(c.shape, zero, std::vector{seq}, 0.0);
  CHECK(one.value == doctest::Approx(-5 * std::log(3.0)));
  CHECK(one.value == doctest::Approx(-testsupport::enumerate(c.shape, zero, c.x).log_z));

  const auto w = c.weights;
  const auto single = log_likelihood_and_gradient(c.shape, w, std::vector{seq}, 0.0);
  const auto twice = log_likelihood_and_gradient(c.shape, w, std::vector{seq, seq}, 0.0);
  CHECK(twice.value == doctest::Approx(2 * single.value).epsilon(1e-12));
  for (std::size_t k = 0; k < w.size(); ++k) {
    CHECK(twice.gradient[k] == doctest::Approx(2 * single.gradient[k]).epsilon(1e-12));
  }

  // Thread count does not change the result.
  std::vector<LabeledSequence> many(9, seq);
  const auto t1 = log_likelihood_and_gradient(c.shape, w, many, 0.3, 1);
  const auto t3 = log_likelihood_and_gradient(c.shape, w, many, 0.3, 3);
  CHECK(t1.value == t3.value);
  CHECK(t1.gradient == t3.gradient);
}

TEST_CASE("non-finite weights diverge") {
  const ChainShape shape(1, 2);
  std::vector<double> w(shape.size(), 0.0);
  w[0] = std::numeric_limits<double>::quiet_NaN();
  const LabeledSequence seq{{{0}}, {0}};
  CHECK_THROWS_AS(log_likelihood_and_gradient(shape, w, std::vector{seq}, 0.0), DivergenceError);
}

namespace {

std::vector<TrainingSentence> overfit_sentences() {
  return build_training_data(testsupport::overfit_corpus()).sentences;
}

double token_accuracy(const CrfModel& m, const std::vector<TrainingSentence>& data) {
  std::size_t right = 0, total = 0;
  for (const auto& s : data) {
    const auto pred = m.decode(s.tokens);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      right += pred[i] == s.labels[i];
      ++total;
    }
  }
  return static_cast<double>(right) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("training overfits the synthetic corpus") {
  const auto data = overfit_sentences();
  REQUIRE(data.size() == 20);
  TrainConfig cfg;
  cfg.l2 = 0.1;
  cfg.seed = 42;
  const CrfModel m = train(data, cfg);
  CHECK(m.stats.iterations <= 200);
  CHECK(token_accuracy(m, data) == 1.0);
  CHECK(m.labels.size() == kBioLabelCount);
  for (std::size_t k = 1; k < m.stats.history.size(); ++k) {
    CHECK(m.stats.history[k] >= m.stats.history[k - 1]);
  }
  CHECK(train(data, cfg) == m);

  // The tagger reproduces the gold spans document by document.
  const CorpusFile corpus = testsupport::overfit_corpus();
  for (const auto& d : corpus.documents) {
    const AnnotatedDocument pred = predict_spans(m, d.document, d.joiner);
    CHECK(validate_document(pred).empty());
    CHECK(to_per_field(pred).mentions == d.mentions);
  }
}

TEST_CASE("heavy regularisation collapses weights") {
  TrainConfig cfg;
  cfg.l2 = 1e6;
  cfg.max_iterations = 50;
  const CrfModel m = train(overfit_sentences(), cfg);
  double mx = 0;
  for (double w : m.weights) mx = std::max(mx, std::abs(w));
  CHECK(mx < 1e-3);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.l2 = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.tolerance = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(train(std::vector<TrainingSentence>{}, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("model save/load") {
  TrainConfig cfg;
  cfg.max_iterations = 20;
  cfg.seed = 9;
  const CrfModel m = train(overfit_sentences(), cfg);
  const std::string bytes = save_model(m);
  const CrfModel back = load_model(bytes);
  CHECK(back == m);
  CHECK(save_model(back) == bytes);

  std::string wrong = bytes;
  wrong.replace(wrong.find("\"version\":1"), 11, "\"version\":2");
  CHECK_THROWS_AS(load_model(wrong), ModelFormatError);
  CHECK_THROWS_AS(load_model("{}"), ModelFormatError);
  CHECK_THROWS_AS(load_model("not json"), ModelFormatError);
}

TEST_CASE("empty fields produce no mentions") {
  TrainConfig cfg;
  cfg.max_iterations = 5;
  const CrfModel m = train(overfit_sentences(), cfg);
  const AnnotatedDocument d = predict_spans(m, Document{"e", "", ""}, "");
  CHECK(d.mentions.empty());
  CHECK(d.coordinate_space == CoordinateSpace::Combined);
}
