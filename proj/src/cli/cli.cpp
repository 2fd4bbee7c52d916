#include "biorefine/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "biorefine/corpus.hpp"
#include "biorefine/crf/model.hpp"
#include "biorefine/crf/tagger.hpp"
#include "biorefine/evaluation.hpp"
#include "biorefine/io.hpp"
#include "biorefine/manifest.hpp"
#include "biorefine/postprocess.hpp"

#ifndef BIOREFINE_VERSION
#define BIOREFINE_VERSION "0.0.0"
#endif
#ifndef BIOREFINE_DEFAULT_CONFIG
#define BIOREFINE_DEFAULT_CONFIG ""
#endif

namespace biorefine::cli {

namespace {

// Carries an exit code out of a command body.
struct CommandError {
  int code;
  std::string message;
};

struct CommonOptions {
  std::string offset_convention;
  std::optional<std::string> joiner;
  std::string manifest_out;
};

FormatOptions format_options(const CommonOptions& o) {
  FormatOptions f;
  if (o.offset_convention == "inclusive") f.offset_convention = OffsetConvention::Inclusive;
  if (o.offset_convention == "half_open") f.offset_convention = OffsetConvention::HalfOpen;
  f.joiner = o.joiner;
  return f;
}

std::string read_input(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::exception& e) {
    throw CommandError{kIo, e.what()};
  }
}

void write_output(const std::string& path, std::string_view bytes) {
  try {
    write_file(path, bytes);
  } catch (const std::exception& e) {
    throw CommandError{kIo, e.what()};
  }
}

CorpusFile load_corpus(const std::string& path, const std::string& bytes,
                       const FormatOptions& options) {
  try {
    return parse_corpus(bytes, options);
  } catch (const ValidationError& e) {
    throw CommandError{kViolations, path + ": " + e.what()};
  } catch (const ParseError& e) {
    throw CommandError{kParse, path + ": " + e.what()};
  }
}

class Recorder {
 public:
  Recorder(std::string command, const std::vector<std::string>& args) {
    m_.command = std::move(command);
    m_.tool_version = BIOREFINE_VERSION;
    m_.arguments = args;
  }
  void input(const std::string& path, std::string_view bytes) {
    m_.inputs.emplace_back(path, sha256_hex(bytes));
  }
  void output(const std::string& path, std::string_view bytes) {
    m_.outputs.emplace_back(path, sha256_hex(bytes));
  }
  void config(std::string_view bytes) { m_.config_digest = sha256_hex(bytes); }

  void write(const std::string& path) {
    if (path.empty()) return;
    m_.timestamp = utc_timestamp();
    write_output(path, m_.to_json());
  }

 private:
  RunManifest m_;
};

std::string manifest_path(const CommonOptions& o, const std::string& primary_out) {
  if (!o.manifest_out.empty()) return o.manifest_out;
  if (primary_out.empty()) return {};
  return primary_out + ".manifest.json";
}

std::string resolve_pipeline_config(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kConfigEnv); env && *env) return env;
  return BIOREFINE_DEFAULT_CONFIG;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, const CommonOptions& common, std::ostream& out) {
  const std::string bytes = read_input(path);
  LenientParse parsed;
  try {
    parsed = parse_corpus_lenient(bytes, format_options(common));
  } catch (const ParseError& e) {
    throw CommandError{kParse, path + ": " + e.what()};
  }
  for (const auto& [doc_id, v] : parsed.violations) {
    out << doc_id << '\t'
        << (v.mention_index ? std::to_string(*v.mention_index) : std::string("-")) << '\t'
        << violation_name(v.kind) << '\t' << v.detail << '\n';
  }
  out << (parsed.violations.empty() ? "ok" : "invalid") << ": "
      << parsed.corpus.documents.size() << " documents, " << parsed.corpus.mention_count()
      << " mentions, " << parsed.violations.size() << " violations\n";
  return parsed.violations.empty() ? kOk : kViolations;
}

struct PostprocessArgs {
  std::string pred;
  std::string config;
  std::string out;
  std::string trace_out;
  bool enable_merge = false;
};

int cmd_postprocess(const PostprocessArgs& a, const CommonOptions& common,
                    const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Recorder rec("postprocess", argv);
  const std::string config_path = resolve_pipeline_config(a.config);
  if (config_path.empty()) {
    throw CommandError{kConfig, "no pipeline config given (use --config or $" +
                                    std::string(kConfigEnv) + ")"};
  }
  postprocess::PipelineConfig cfg;
  try {
    cfg = postprocess::load_pipeline_config(config_path);
  } catch (const postprocess::ConfigError& e) {
    throw CommandError{kConfig, config_path + ": " + e.what()};
  }
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  {
    std::string digest_material = read_input(config_path);
    for (const auto& p : cfg.lexicon_paths) digest_material += read_input(p);
    rec.config(digest_material);
    rec.input(config_path, read_input(config_path));
    for (const auto& p : cfg.lexicon_paths) rec.input(p, read_input(p));
  }
  if (a.enable_merge) cfg.pipeline.merge.enabled = true;

  FormatOptions fo = format_options(common);
  if (!fo.joiner && cfg.joiner) fo.joiner = cfg.joiner;
  const std::string bytes = read_input(a.pred);
  rec.input(a.pred, bytes);
  const CorpusFile pred = load_corpus(a.pred, bytes, fo);

  postprocess::PipelineResult result;
  try {
    result = postprocess::run_pipeline(pred, cfg.pipeline);
  } catch (const postprocess::PipelineError& e) {
    throw CommandError{kData, a.pred + ": " + e.what()};
  }

  std::string written;
  try {
    written = write_predictions(result.corpus);
  } catch (const SerializationError& e) {
    throw CommandError{kConfig, std::string(e.what()) + " (add finalize_tags to the rule list)"};
  }
  write_output(a.out, written);
  rec.output(a.out, written);
  if (!a.trace_out.empty()) {
    const std::string trace = postprocess::render_trace(result.trace);
    write_output(a.trace_out, trace);
    rec.output(a.trace_out, trace);
  }
  rec.write(manifest_path(common, a.out));
  out << "post-processed " << result.corpus.documents.size() << " documents: "
      << pred.mention_count() << " -> " << result.corpus.mention_count() << " mentions, "
      << result.trace.size() << " changes\n";
  return kOk;
}

struct EvaluateArgs {
  std::string gold;
  std::string pred;
  std::string policy = "all_13";
  std::string report_out;
};

int cmd_evaluate(const EvaluateArgs& a, const CommonOptions& common,
                 const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Recorder rec("evaluate", argv);
  const auto policy = eval::parse_policy(a.policy);
  if (!policy) throw CommandError{kUsage, "unknown --policy '" + a.policy + "'"};
  rec.config(a.policy);

  const std::string gold_bytes = read_input(a.gold);
  const std::string pred_bytes = read_input(a.pred);
  rec.input(a.gold, gold_bytes);
  rec.input(a.pred, pred_bytes);
  CorpusFile gold = load_corpus(a.gold, gold_bytes, format_options(common));
  CorpusFile pred = load_corpus(a.pred, pred_bytes, format_options(common));

  // Scores are taken in per-field space when the two files disagree.
  const auto space = [](const CorpusFile& c) {
    return c.documents.empty() ? CoordinateSpace::PerField : c.documents.front().coordinate_space;
  };
  if (!gold.documents.empty() && !pred.documents.empty() && space(gold) != space(pred)) {
    err << "note: localizing combined-space offsets to per-field for scoring\n";
    for (auto& d : gold.documents) d = to_per_field(d);
    for (auto& d : pred.documents) d = to_per_field(d);
  }

  eval::EvalReport report;
  try {
    report = eval::evaluate_corpus(gold, pred, *policy);
  } catch (const eval::EvalError& e) {
    throw CommandError{kData, e.what()};
  }
  out << eval::render_report(report);
  if (!a.report_out.empty()) {
    const std::string json = eval::report_json(report);
    write_output(a.report_out, json);
    rec.output(a.report_out, json);
  }
  rec.write(manifest_path(common, a.report_out));
  return kOk;
}

int cmd_stats(const std::string& path, const std::string& report_out, const CommonOptions& common,
              const std::vector<std::string>& argv, std::ostream& out) {
  Recorder rec("stats", argv);
  const std::string bytes = read_input(path);
  rec.input(path, bytes);
  const CorpusFile c = load_corpus(path, bytes, format_options(common));
  const LabelCountReport r = label_counts(c);
  out << render_label_counts(r);
  if (!report_out.empty()) {
    const std::string json = label_counts_json(r);
    write_output(report_out, json);
    rec.output(report_out, json);
  }
  rec.write(manifest_path(common, report_out));
  return kOk;
}

crf::TrainConfig load_train_config(const std::string& path, std::string& raw) {
  crf::TrainConfig cfg;
  if (path.empty()) return cfg;
  raw = read_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw CommandError{kConfig, path + ": " + e.what()};
  }
  if (!j.is_object()) throw CommandError{kConfig, path + ": training config must be an object"};
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "l2") cfg.l2 = v.get<double>();
      else if (key == "max_iterations") cfg.max_iterations = v.get<std::size_t>();
      else if (key == "tolerance") cfg.tolerance = v.get<double>();
      else if (key == "learning_rate") cfg.learning_rate = v.get<double>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "init_scale") cfg.init_scale = v.get<double>();
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else throw CommandError{kConfig, path + ": unknown key '" + key + "'"};
    }
    cfg.validate();
  } catch (const nlohmann::json::exception& e) {
    throw CommandError{kConfig, path + ": " + e.what()};
  } catch (const std::invalid_argument& e) {
    throw CommandError{kConfig, path + ": " + e.what()};
  }
  return cfg;
}

std::optional<crf::PosSidecar> load_sidecar(const std::string& path, Recorder& rec) {
  if (path.empty()) return std::nullopt;
  const std::string bytes = read_input(path);
  rec.input(path, bytes);
  try {
    return crf::PosSidecar::parse(bytes);
  } catch (const std::invalid_argument& e) {
    throw CommandError{kParse, path + ": " + e.what()};
  }
}

struct TrainArgs {
  std::vector<std::string> train;
  std::string config;
  std::string model_out;
  std::string pos_sidecar;
  std::optional<std::uint64_t> seed;
};

int cmd_train_crf(const TrainArgs& a, const CommonOptions& common,
                  const std::vector<std::string>& argv, std::ostream& out) {
  Recorder rec("train-crf", argv);
  std::string raw_config;
  crf::TrainConfig cfg = load_train_config(a.config, raw_config);
  if (a.seed) cfg.seed = *a.seed;
  rec.config(raw_config + "\nseed=" + std::to_string(cfg.seed));

  CorpusFile all;
  all.provenance = Provenance::Gold;
  for (const auto& path : a.train) {
    const std::string bytes = read_input(path);
    rec.input(path, bytes);
    CorpusFile c = load_corpus(path, bytes, format_options(common));
    for (auto& d : c.documents) {
      if (all.find(d.document.doc_id)) {
        throw CommandError{kData, path + ": document '" + d.document.doc_id +
                                      "' already appears in an earlier training file"};
      }
      all.documents.push_back(std::move(d));
    }
  }
  const auto sidecar = load_sidecar(a.pos_sidecar, rec);
  crf::TaggingOptions topts;
  if (sidecar) topts.sidecar = &*sidecar;

  const crf::TrainingData data = crf::build_training_data(all, topts);
  std::size_t tokens = 0;
  for (const auto& s : data.sentences) tokens += s.tokens.size();
  if (tokens == 0) throw CommandError{kData, "training set is empty"};

  crf::CrfModel model;
  try {
    model = crf::train(data.sentences, cfg);
  } catch (const crf::DivergenceError& e) {
    throw CommandError{kData, std::string("training diverged: ") + e.what()};
  }
  const std::string bytes = crf::save_model(model);
  write_output(a.model_out, bytes);
  rec.output(a.model_out, bytes);
  rec.write(manifest_path(common, a.model_out));
  out << "trained on " << data.sentences.size() << " sentences (" << tokens << " tokens, "
      << model.features.size() << " features): " << model.stats.iterations << " iterations, "
      << "objective " << model.stats.objective << (model.stats.converged ? ", converged" : "")
      << "; " << data.misaligned << " misaligned mentions, " << data.overlaps_dropped
      << " overlapping mentions dropped\n";
  return kOk;
}

struct TagArgs {
  std::string model;
  std::string corpus;
  std::string out;
  std::string pos_sidecar;
  bool localize = false;
};

int cmd_tag_crf(const TagArgs& a, const CommonOptions& common,
                const std::vector<std::string>& argv, std::ostream& out) {
  Recorder rec("tag-crf", argv);
  const std::string model_bytes = read_input(a.model);
  rec.input(a.model, model_bytes);
  rec.config(model_bytes);
  crf::CrfModel model;
  try {
    model = crf::load_model(model_bytes);
  } catch (const crf::ModelFormatError& e) {
    throw CommandError{kData, a.model + ": " + e.what()};
  }
  const std::string bytes = read_input(a.corpus);
  rec.input(a.corpus, bytes);
  const CorpusFile corpus = load_corpus(a.corpus, bytes, format_options(common));
  const auto sidecar = load_sidecar(a.pos_sidecar, rec);
  crf::TaggingOptions topts;
  if (sidecar) topts.sidecar = &*sidecar;

  CorpusFile pred = crf::predict_corpus(model, corpus, topts);
  std::string written;
  if (a.localize) {
    for (auto& d : pred.documents) d = to_per_field(d);
    written = write_predictions(pred);
  } else {
    written = write_corpus(pred);
  }
  write_output(a.out, written);
  rec.output(a.out, written);
  rec.write(manifest_path(common, a.out));
  out << "tagged " << pred.documents.size() << " documents, " << pred.mention_count()
      << " mentions\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biomedical NER prediction refinement and scoring toolkit", "biorefine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(BIOREFINE_VERSION));

  CommonOptions common;
  const auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--offset-convention", common.offset_convention,
                    "Override the end-offset convention of input files")
        ->check(CLI::IsMember({"half_open", "inclusive"}));
    sub->add_option("--joiner", common.joiner, "String between title and abstract in combined text");
    sub->add_option("--manifest-out", common.manifest_out, "Where to write the run manifest");
  };

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a corpus or prediction file");
  validate->add_option("corpus", validate_path, "Corpus file")->required();
  add_common(validate);

  PostprocessArgs pp;
  auto* post = app.add_subcommand("postprocess", "Apply the rule pipeline to predictions");
  post->add_option("predictions", pp.pred, "Prediction file")->required();
  post->add_option("--config", pp.config, "Pipeline config (default: $BIOREFINE_CONFIG)");
  post->add_option("-o,--out", pp.out, "Output prediction file")->required();
  post->add_option("--trace-out", pp.trace_out, "Write the rule trace (JSON lines)");
  post->add_flag("--enable-merge", pp.enable_merge, "Enable adjacent-fragment merging");
  add_common(post);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Exact-match precision/recall/F1");
  evaluate->add_option("gold", ev.gold, "Gold corpus")->required();
  evaluate->add_option("predictions", ev.pred, "Prediction file")->required();
  evaluate->add_option("--policy", ev.policy, "Macro-average label set")
      ->check(CLI::IsMember({"all_13", "present_only"}));
  evaluate->add_option("--report-out", ev.report_out, "Write a JSON report");
  add_common(evaluate);

  std::string stats_path;
  std::string stats_report;
  auto* stats = app.add_subcommand("stats", "Entity label counts");
  stats->add_option("corpus", stats_path, "Corpus file")->required();
  stats->add_option("--report-out", stats_report, "Write counts and shares as JSON");
  add_common(stats);

  TrainArgs tr;
  std::uint64_t seed = 0;
  auto* train = app.add_subcommand("train-crf", "Train the CRF baseline tagger");
  train->add_option("train", tr.train, "Training corpora (concatenated)")->required();
  train->add_option("--config", tr.config, "Training config (JSON)");
  train->add_option("-o,--model-out", tr.model_out, "Model file to write")->required();
  auto* seed_opt = train->add_option("--seed", seed, "Random seed");
  train->add_option("--pos-sidecar", tr.pos_sidecar, "Externally supplied POS tags (TSV)");
  add_common(train);

  TagArgs tg;
  auto* tag = app.add_subcommand("tag-crf", "Tag a corpus with a trained CRF");
  tag->add_option("model", tg.model, "Model file")->required();
  tag->add_option("corpus", tg.corpus, "Corpus to tag")->required();
  tag->add_option("-o,--out", tg.out, "Prediction file to write")->required();
  tag->add_option("--pos-sidecar", tg.pos_sidecar, "Externally supplied POS tags (TSV)");
  tag->add_flag("--localize", tg.localize, "Write per-field offsets instead of combined");
  add_common(tag);

  std::vector<std::string> argv_store{"biorefine"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (seed_opt->count() > 0) tr.seed = seed;

  try {
    if (*validate) return cmd_validate(validate_path, common, out);
    if (*post) return cmd_postprocess(pp, common, args, out, err);
    if (*evaluate) return cmd_evaluate(ev, common, args, out, err);
    if (*stats) return cmd_stats(stats_path, stats_report, common, args, out);
    if (*train) return cmd_train_crf(tr, common, args, out);
    if (*tag) return cmd_tag_crf(tg, common, args, out);
  } catch (const CommandError& e) {
    err << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace biorefine::cli
