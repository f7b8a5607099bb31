#include "gradrules/pipeline.hpp"

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

#include "gradrules/transform.hpp"

namespace gradrules {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string class_file_stem(std::string_view class_name) {
  std::string s;
  for (char c : class_name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '-' || c == '_';
    s.push_back(ok ? c : '_');
  }
  if (s.empty() || s == "." || s == "..") s = "class" + s;
  return s;
}

namespace {

// Length-prefixed fields so that ("ab","c") and ("a","bc") differ.
class Stamp {
 public:
  explicit Stamp(std::string_view stage) { add(stage); }
  Stamp& add(std::string_view field) {
    const auto n = std::to_string(field.size());
    state_ = fnv1a(n, state_);
    state_ = fnv1a(":", state_);
    state_ = fnv1a(field, state_);
    return *this;
  }
  std::string hex() const {
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << state_;
    return out.str();
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.out.empty()) throw ConfigError("an output directory is required");
  std::error_code ec;
  std::filesystem::create_directories(config_.out / "stamps", ec);
  if (ec) throw IoError("cannot create " + (config_.out / "stamps").string() + ": " + ec.message());
  std::filesystem::create_directories(config_.out / "rules", ec);
  if (ec) throw IoError("cannot create " + (config_.out / "rules").string() + ": " + ec.message());

  previous_logger_ = spdlog::default_logger();
  auto to_stderr = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
  to_stderr->set_pattern("[%l] %v");
  to_stderr->set_level(previous_logger_ ? previous_logger_->level() : spdlog::level::info);
  auto to_file = std::make_shared<spdlog::sinks::basic_file_sink_mt>(path("run.log").string());
  to_file->set_level(spdlog::level::info);
  auto logger = std::make_shared<spdlog::logger>("gradrules", spdlog::sinks_init_list{to_stderr, to_file});
  logger->set_level(spdlog::level::info);
  logger->flush_on(spdlog::level::info);
  spdlog::set_default_logger(std::move(logger));
  spdlog::info("run started in {} (mode {}, selector {}, k {})", config_.out.string(), to_string(config_.mode),
               to_string(config_.selector), config_.k);
}

Pipeline::~Pipeline() {
  spdlog::default_logger()->flush();
  if (previous_logger_) spdlog::set_default_logger(previous_logger_);
}

bool Pipeline::up_to_date(std::string_view stage, const std::string& stamp,
                          std::initializer_list<std::filesystem::path> artifacts) const {
  const auto file = config_.out / "stamps" / (std::string(stage) + ".stamp");
  if (!std::filesystem::exists(file)) return false;
  if (read_file(file) != stamp + "\n") return false;
  for (const auto& a : artifacts) {
    if (!std::filesystem::exists(a)) return false;
  }
  spdlog::info("stage {} is up to date; skipping", stage);
  return true;
}

void Pipeline::mark_done(std::string_view stage, const std::string& stamp) {
  write_file(config_.out / "stamps" / (std::string(stage) + ".stamp"), stamp + "\n");
  write_file(path("config.txt"), serialize_config(config_));
  executed_.emplace_back(stage);
}

std::string Pipeline::featurize() {
  if (config_.corpus.empty()) throw ConfigError("a corpus root is required");
  const auto split = split_corpus(config_.corpus);
  Stamp s("featurize");
  for (const auto& c : split.classes) s.add(c);
  for (const auto* part : {&split.train, &split.dev, &split.test}) {
    s.add("part");
    for (const auto& d : *part) s.add(d.id).add(d.label).add(d.raw);
  }
  const auto stamp = s.hex();
  if (up_to_date("featurize", stamp, {path("train.fm"), path("dev.fm"), path("test.fm")})) return stamp;

  spdlog::info("featurizing {} train / {} dev / {} test documents", split.train.size(), split.dev.size(),
               split.test.size());
  auto ds = build_dataset(split);
  spdlog::info("vocabulary: {} terms", ds.vocabulary.size());
  const auto save = [&](std::string_view name, FeatureMatrix& m) {
    SparseText t{ds.classes, ds.vocabulary, std::move(m)};
    save_sparse_text(path(name), kFeatureCacheMagic, t);
  };
  save("train.fm", ds.train);
  save("dev.fm", ds.dev);
  save("test.fm", ds.test);
  mark_done("featurize", stamp);
  return stamp;
}

std::string Pipeline::train() {
  const auto up = featurize();
  Stamp s("train");
  s.add(up);
  for (auto h : config_.hidden_layers) s.add(std::to_string(h));
  s.add(std::to_string(config_.epochs)).add(std::to_string(config_.batch_size));
  s.add(format_double(config_.learning_rate)).add(std::to_string(config_.seed));
  const auto stamp = s.hex();
  if (up_to_date("train", stamp, {path("model.net")})) return stamp;

  const auto text = load_sparse_text(path("train.fm"), kFeatureCacheMagic);
  const auto nc = config_.network(text.matrix.n_features, text.classes.size());
  spdlog::info("training {}-layer network on {} instances for {} epochs", nc.layer_sizes.size() - 1,
               text.matrix.size(), nc.epochs);
  TrainingReport report;
  const auto net = train_network(text.matrix, nc, &report);
  if (!report.epoch_loss.empty()) spdlog::info("final training loss {:.6f}", report.epoch_loss.back());
  net.save(path("model.net"));
  mark_done("train", stamp);
  return stamp;
}

FidelityReport Pipeline::evaluate_classifier() {
  train();
  const auto net = TrainedNetwork::load(path("model.net"));
  const auto test = load_sparse_text(path("test.fm"), kFeatureCacheMagic);
  const auto predicted = predict_all(net, test.matrix);
  auto report = label_agreement(predicted, test.matrix.labels, test.classes);
  spdlog::info("classifier test macro-F {:.4f}", report.macro_f);
  return report;
}

std::string Pipeline::saliency() {
  const auto up = train();
  const auto stamp = Stamp("saliency").add(up).add(to_string(config_.mode)).hex();
  if (up_to_date("saliency", stamp, {path("explain.sm"), path("train.sm")})) return stamp;

  const auto net = TrainedNetwork::load(path("model.net"));
  const auto train_text = load_sparse_text(path("train.fm"), kFeatureCacheMagic);
  const auto& classes = train_text.classes;
  const auto& vocab = train_text.vocabulary;

  const auto transformed = [&](const FeatureMatrix& m, SaliencyTarget target) {
    const SaliencyMap map(net, m, target);
    const auto rw = reweigh(m, map);
    if (rw.zero_gradient_entries > 0) {
      spdlog::info("{} nonzero inputs have an exactly zero gradient", rw.zero_gradient_entries);
    }
    auto signs = sign_reduce(rw);
    signs.labels.resize(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) signs.labels[j] = map.target(j);
    return signs;
  };

  SignMatrix explain_signs, train_signs;
  switch (config_.mode) {
    case ExplainMode::TestPredictions: {
      const auto test = load_sparse_text(path("test.fm"), kFeatureCacheMagic);
      explain_signs = transformed(test.matrix, SaliencyTarget::PredictedClass);
      train_signs = transformed(train_text.matrix, SaliencyTarget::PredictedClass);
      train_signs.labels = train_text.matrix.labels;
      break;
    }
    case ExplainMode::TrainGoldTransformed:
      train_signs = transformed(train_text.matrix, SaliencyTarget::GoldClass);
      explain_signs = train_signs;
      break;
    case ExplainMode::TrainGoldOriginal:
      train_signs = presence_signs(train_text.matrix);
      explain_signs = train_signs;
      break;
  }
  save_sign_matrix(path("explain.sm"), explain_signs, classes, vocab);
  save_sign_matrix(path("train.sm"), train_signs, classes, vocab);
  spdlog::info("sign matrices: {} explained instances ({} nonzeros), {} train instances", explain_signs.size(),
               explain_signs.nnz(), train_signs.size());
  mark_done("saliency", stamp);
  return stamp;
}

std::string Pipeline::select() {
  const auto up = saliency();
  const auto stamp = Stamp("select").add(up).add(to_string(config_.selector)).add(std::to_string(config_.k)).hex();
  if (up_to_date("select", stamp, {path("selection.tsv")})) return stamp;

  FeatureScores scores;
  Vocabulary vocab;
  if (config_.selector == SelectorKind::SensitivityAnalysis) {
    const auto net = TrainedNetwork::load(path("model.net"));
    auto train_text = load_sparse_text(path("train.fm"), kFeatureCacheMagic);
    scores = sensitivity_scores(net, train_text.matrix);
    vocab = std::move(train_text.vocabulary);
  } else {
    auto text = load_sign_matrix_text(path("train.sm"));
    const auto signs = to_sign_matrix(text.matrix);
    scores = mutual_information_scores(signs, signs.labels, text.classes.size());
    vocab = std::move(text.vocabulary);
  }
  const auto selection = select_top_k(scores, config_.k);
  save_selection(path("selection.tsv"), selection, scores, vocab);
  spdlog::info("selected {} of {} features by {}", selection.indices.size(), scores.scores.size(),
               to_string(config_.selector));
  mark_done("select", stamp);
  return stamp;
}

ExplainedData Pipeline::explained_data() {
  select();
  return load_explained_data();
}

ExplainedData Pipeline::load_explained_data() const {
  const auto selection = load_selection(path("selection.tsv"));
  ExplainedData out;
  if (config_.mode == ExplainMode::TrainGoldOriginal && config_.original_numeric) {
    const auto text = load_sparse_text(path("train.fm"), kFeatureCacheMagic);
    out.classes = text.classes;
    out.data = InductionData::from_features(text.matrix, selection.indices, text.vocabulary);
    out.targets = text.matrix.labels;
  } else {
    const auto text = load_sign_matrix_text(path("explain.sm"));
    const auto signs = to_sign_matrix(text.matrix);
    out.classes = text.classes;
    out.data = InductionData::from_signs(signs, selection.indices, text.vocabulary);
    out.targets = signs.labels;
  }
  return out;
}

void Pipeline::write_rules(const std::vector<RuleSet>& rulesets, const InductionData& data) {
  for (const auto& rs : rulesets) {
    const auto stem = class_file_stem(rs.target_name);
    write_file(config_.out / "rules" / (stem + ".json"), ruleset_to_json(rs, data));
    write_file(config_.out / "rules" / (stem + ".txt"), render_ruleset(rs, data));
  }
}

PipelineSummary Pipeline::explain() {
  const auto up = select();
  const auto sc = config_.sweep();
  Stamp s("explain");
  s.add(up).add(config_.original_numeric ? "numeric" : "presence");
  for (auto seed : sc.seeds) s.add(std::to_string(seed));
  s.add(to_string(sc.grid)).add(std::to_string(sc.base.optimization_rounds)).add(format_double(sc.base.grow_fraction));
  const auto stamp = s.hex();

  PipelineSummary summary;
  summary.classifier = evaluate_classifier();
  summary.classes = summary.classifier.class_names;
  summary.n_selected = load_selection(path("selection.tsv")).indices.size();
  if (up_to_date("explain", stamp, {path("fidelity.json"), path("consistency.json"), path("sweep.csv")})) {
    summary.fidelity = fidelity_from_json(read_file(path("fidelity.json")));
    summary.consistency = consistency_from_json(read_file(path("consistency.json")));
    return summary;
  }

  const auto ed = explained_data();
  summary.n_explained = ed.data.rows();
  spdlog::info("sweeping {} seeds x min-cover grid '{}' over {} classes ({} jobs)", sc.seeds.size(),
               to_string(sc.grid), ed.classes.size(), sc.jobs);
  const auto result = sweep(ed.data, ed.targets, ed.classes, sc);
  summary.fidelity = result.best_fidelity;
  summary.consistency = consistency(result, ed.data, ed.classes);
  for (const auto& cs : result.classes) {
    const auto& best = cs.cells[cs.best];
    spdlog::info("class {}: best F {:.4f} (seed {}, min_cover {}), F std {:.4f}, {} well-performing",
                 ed.classes[cs.target], best.scores.f, best.seed, best.min_cover, cs.f_std, cs.well_performing.size());
  }
  spdlog::info("macro fidelity P {:.4f} R {:.4f} F {:.4f}", summary.fidelity.macro_precision,
               summary.fidelity.macro_recall, summary.fidelity.macro_f);

  write_rules(result.best_rulesets(), ed.data);
  write_file(path("fidelity.json"), fidelity_to_json(summary.fidelity));
  write_file(path("consistency.json"), consistency_to_json(summary.consistency));
  write_file(path("sweep.csv"), sweep_to_csv(result, ed.classes));
  mark_done("explain", stamp);
  return summary;
}

FidelityReport Pipeline::induce(std::size_t min_cover) {
  const auto ed = explained_data();
  RipperConfig rc;
  rc.seed = config_.seed;
  rc.min_cover = min_cover;
  rc.optimization_rounds = config_.optimization_rounds;
  rc.grow_fraction = config_.grow_fraction;
  const auto induced = induce_one_vs_rest(ed.data, ed.targets, ed.classes, rc);
  std::vector<RuleSet> rulesets;
  for (const auto& [c, rs] : induced) rulesets.push_back(rs);
  write_rules(rulesets, ed.data);
  // rules/ no longer holds the sweep's best rule-sets
  std::filesystem::remove(config_.out / "stamps" / "explain.stamp");
  auto report = fidelity(rulesets, ed.data, ed.targets, ed.classes);
  spdlog::info("single induction (seed {}, min_cover {}): macro F {:.4f}", rc.seed, min_cover, report.macro_f);
  return report;
}

PipelineSummary run_pipeline(const RunConfig& config) {
  Pipeline p(config);
  return p.explain();
}

}  // namespace gradrules
