#include "biorefine/crf/model.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

namespace biorefine::crf {

using ojson = nlohmann::ordered_json;

namespace {

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Uniform in [-scale, scale) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
std::vector<double> initial_weights(std::size_t n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::vector<double> w(n);
  for (double& x : w) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x = scale * (2.0 * u - 1.0);
  }
  return w;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(l2 >= 0.0)) throw std::invalid_argument("l2 strength must be >= 0");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(init_scale >= 0.0)) throw std::invalid_argument("init scale must be >= 0");
}

std::vector<BioLabel> CrfModel::decode(std::span<const Token> sentence) const {
  if (sentence.empty()) return {};
  const FeatureSequence x = lookup_sentence(sentence, features);
  const ViterbiResult v = viterbi(shape(), weights, x);
  std::vector<BioLabel> out;
  out.reserve(v.path.size());
  for (std::size_t y : v.path) out.push_back(labels[y]);
  return out;
}

bool CrfModel::operator==(const CrfModel& o) const {
  return labels == o.labels && features == o.features && weights == o.weights &&
         config.l2 == o.config.l2 && config.max_iterations == o.config.max_iterations &&
         config.tolerance == o.config.tolerance && config.learning_rate == o.config.learning_rate &&
         config.seed == o.config.seed && config.init_scale == o.config.init_scale &&
         stats.iterations == o.stats.iterations && stats.converged == o.stats.converged &&
         stats.objective == o.stats.objective;
}

std::string save_model(const CrfModel& m) {
  ojson root;
  root["format"] = std::string(kModelFormat);
  root["version"] = kModelVersion;
  ojson labels = ojson::array();
  for (const auto& l : m.labels) labels.push_back(bio_name(l));
  root["labels"] = std::move(labels);
  root["features"] = m.features.names();
  root["weights"] = m.weights;
  ojson training;
  training["l2"] = m.config.l2;
  training["max_iterations"] = m.config.max_iterations;
  training["tolerance"] = m.config.tolerance;
  training["learning_rate"] = m.config.learning_rate;
  training["seed"] = m.config.seed;
  training["init_scale"] = m.config.init_scale;
  training["iterations"] = m.stats.iterations;
  training["converged"] = m.stats.converged;
  training["objective"] = m.stats.objective;
  root["training"] = std::move(training);
  return root.dump(-1, ' ', false, ojson::error_handler_t::strict) + "\n";
}

CrfModel load_model(std::string_view bytes) {
  ojson root;
  try {
    root = ojson::parse(bytes.begin(), bytes.end());
  } catch (const ojson::parse_error& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  if (!root.is_object() || root.value("format", std::string()) != kModelFormat) {
    throw ModelFormatError("not a biorefine CRF model file");
  }
  if (!root.contains("version") || !root["version"].is_number_integer() ||
      root["version"].get<int>() != kModelVersion) {
    throw ModelFormatError("unsupported model version " +
                           (root.contains("version") ? root["version"].dump() : "<missing>") +
                           " (this build reads version " + std::to_string(kModelVersion) + ")");
  }
  try {
    CrfModel m;
    for (const auto& name : root.at("labels")) {
      auto l = parse_bio(name.get<std::string>());
      if (!l) throw ModelFormatError("unknown label " + name.dump());
      m.labels.push_back(*l);
    }
    m.features = FeatureIndex::from_names(root.at("features").get<std::vector<std::string>>());
    m.weights = root.at("weights").get<std::vector<double>>();
    if (m.weights.size() != m.shape().size()) {
      throw ModelFormatError("weight count " + std::to_string(m.weights.size()) +
                             " does not match " + std::to_string(m.features.size()) +
                             " features x " + std::to_string(m.labels.size()) + " labels");
    }
    for (double w : m.weights) {
      if (!std::isfinite(w)) throw ModelFormatError("non-finite weight");
    }
    const ojson& t = root.at("training");
    m.config.l2 = t.at("l2").get<double>();
    m.config.max_iterations = t.at("max_iterations").get<std::size_t>();
    m.config.tolerance = t.at("tolerance").get<double>();
    m.config.learning_rate = t.at("learning_rate").get<double>();
    m.config.seed = t.at("seed").get<std::uint64_t>();
    m.config.init_scale = t.at("init_scale").get<double>();
    m.stats.iterations = t.at("iterations").get<std::size_t>();
    m.stats.converged = t.at("converged").get<bool>();
    m.stats.objective = t.at("objective").get<double>();
    return m;
  } catch (const ojson::exception& e) {
    throw ModelFormatError(std::string("invalid model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("invalid model file: ") + e.what());
  }
}

TrainStats optimize(const ChainShape& shape, std::vector<double>& weights,
                    std::span<const LabeledSequence> batch, const TrainConfig& config) {
  config.validate();
  TrainStats stats;
  std::vector<double> accum(weights.size(), 0.0);
  std::vector<double> candidate(weights.size());
  double rate = config.learning_rate;
  constexpr double kEps = 1e-8;

  Objective current = log_likelihood_and_gradient(shape, weights, batch, config.l2, config.threads);
  stats.history.push_back(current.value);

  while (stats.iterations < config.max_iterations) {
    stats.gradient_norm = l2_norm(current.gradient);
    if (stats.gradient_norm < config.tolerance) {
      stats.converged = true;
      break;
    }
    ++stats.iterations;

    std::vector<double> next_accum = accum;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double g = current.gradient[i];
      next_accum[i] += g * g;
      candidate[i] = weights[i] + rate * g / (std::sqrt(next_accum[i]) + kEps);
    }
    Objective next = log_likelihood_and_gradient(shape, candidate, batch, config.l2, config.threads);
    if (next.value < current.value) {
      ++stats.rejected_steps;
      rate *= 0.5;
      if (rate < 1e-12) break;
      continue;
    }
    weights.swap(candidate);
    accum.swap(next_accum);
    current = std::move(next);
    stats.history.push_back(current.value);
    rate = std::min(config.learning_rate, rate * 1.25);
  }
  stats.objective = current.value;
  stats.gradient_norm = l2_norm(current.gradient);
  if (!stats.converged && stats.gradient_norm < config.tolerance) stats.converged = true;
  return stats;
}

CrfModel train(std::span<const TrainingSentence> corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");

  CrfModel m;
  m.config = config;
  for (std::size_t i = 0; i < kBioLabelCount; ++i) m.labels.push_back(bio_from_index(i));

  std::vector<LabeledSequence> batch;
  batch.reserve(corpus.size());
  for (const TrainingSentence& s : corpus) {
    if (s.tokens.empty()) continue;
    if (s.labels.size() != s.tokens.size()) {
      throw std::invalid_argument("training sentence has mismatched token and label counts");
    }
    LabeledSequence seq;
    seq.features = index_sentence(s.tokens, m.features);
    for (const BioLabel& l : s.labels) seq.labels.push_back(bio_index(l));
    batch.push_back(std::move(seq));
  }
  if (batch.empty()) throw std::invalid_argument("training corpus has no tokens");
  m.features.freeze();

  m.weights = initial_weights(m.shape().size(), config.seed, config.init_scale);
  m.stats = optimize(m.shape(), m.weights, batch, config);
  return m;
}

}  // namespace biorefine::crf
