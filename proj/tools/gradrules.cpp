// gradrules: rule-set explanations of a feedforward text classifier.
//
//   gradrules explain --corpus data/ --selector mi --mode test-preds --out run1/
//   gradrules render run1/rules/sci.electronics.json

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gradrules/config.hpp"
#include "gradrules/pipeline.hpp"
#include "gradrules/ripper.hpp"

namespace {

using namespace gradrules;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Flags {
  std::optional<std::string> config_file;
  std::vector<std::pair<std::string, std::optional<std::string>>> settings;

  std::optional<std::string>& slot(const std::string& key) {
    settings.emplace_back(key, std::nullopt);
    return settings.back().second;
  }
};

RunConfig resolve(const Flags& flags, bool original_numeric) {
  RunConfig config;
  if (flags.config_file) config = load_config(*flags.config_file);
  for (const auto& [key, value] : flags.settings) {
    if (value) apply_setting(config, key, *value);
  }
  if (original_numeric) config.original_numeric = true;
  config.validate();
  return config;
}

void print_fidelity(const FidelityReport& r, const char* title) {
  std::cout << title << '\n';
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& s = r.per_class[c];
    std::cout << "  " << r.class_names[c] << "  P " << s.precision << "  R " << s.recall << "  F " << s.f << '\n';
  }
  std::cout << "  macro  P " << r.macro_precision << "  R " << r.macro_recall << "  F " << r.macro_f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global if-then-else rule explanations of a feedforward text classifier"};
  app.require_subcommand(1);

  Flags flags;
  const std::vector<std::pair<std::string, std::string>> option_keys = {
      {"--corpus", "corpus"}, {"--out", "out"},     {"--mode", "mode"}, {"--selector", "selector"},
      {"--k", "k"},           {"--seeds", "seeds"}, {"--min-cover-grid", "min_cover_grid"},
      {"--jobs", "jobs"},     {"--seed", "seed"},   {"--epochs", "epochs"}};
  // reserve() keeps the slot references handed to CLI11 stable.
  flags.settings.reserve(option_keys.size());
  for (const auto& [flag, key] : option_keys) flags.slot(key);
  bool original_numeric = false;

  const auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_file, "key=value configuration file; flags override it");
    for (std::size_t i = 0; i < option_keys.size(); ++i) {
      const auto& [flag, key] = option_keys[i];
      auto* opt = sub->add_option(flag, flags.settings[i].second);
      if (key == "mode") {
        opt->check(CLI::IsMember({"test-preds", "train-gold-original", "train-gold-transformed"}));
        opt->description("what to explain (default test-preds)");
      } else if (key == "selector") {
        opt->check(CLI::IsMember({"sa", "mi"}));
        opt->description("feature selector: sensitivity analysis or mutual information (default mi)");
      } else if (key == "min_cover_grid") {
        opt->description("ladder, full, or a comma-separated list (default ladder)");
      } else if (key == "seeds") {
        opt->description("number of sweep seeds, starting at --seed (default 50)");
      } else if (key == "k") {
        opt->description("number of selected features (default 1000)");
      } else if (key == "jobs") {
        opt->description("parallel sweep jobs (default 1)");
      }
    }
    sub->add_flag("--original-numeric", original_numeric,
                  "train-gold-original mode: threshold raw TF-IDF values instead of presence tests");
    return sub;
  };

  auto* featurize = add_run_options(app.add_subcommand("featurize", "split and featurize the corpus"));
  auto* train = add_run_options(app.add_subcommand("train", "train the classifier and report its test scores"));
  auto* saliency = add_run_options(app.add_subcommand("saliency", "compute reweighed sign matrices"));
  auto* select = add_run_options(app.add_subcommand("select", "select the top-k features"));
  auto* induce =
      add_run_options(app.add_subcommand("induce", "induce one rule-set per class with a single configuration"));
  std::size_t min_cover = 2;
  induce->add_option("--min-cover", min_cover, "minimum correctly covered instances per rule")->capture_default_str();
  auto* explain = add_run_options(app.add_subcommand("explain", "run the full pipeline including the sweep"));
  auto* consistency =
      add_run_options(app.add_subcommand("consistency", "compare rule-sets of one class on the explained data"));
  std::string best_file;
  std::vector<std::string> other_files;
  consistency->add_option("best", best_file, "reference rule-set JSON")->required();
  consistency->add_option("others", other_files, "rule-set JSON files to compare against")->required();
  auto* render = app.add_subcommand("render", "print a rule-set JSON file as if / elif / else text");
  std::string render_file;
  render->add_option("file", render_file, "rule-set JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (render->parsed()) {
      std::cout << render_ruleset(load_ruleset(render_file));
      return 0;
    }

    Pipeline pipeline(resolve(flags, original_numeric));
    if (featurize->parsed()) {
      pipeline.featurize();
    } else if (train->parsed()) {
      print_fidelity(pipeline.evaluate_classifier(), "classifier on test:");
    } else if (saliency->parsed()) {
      pipeline.saliency();
    } else if (select->parsed()) {
      pipeline.select();
    } else if (induce->parsed()) {
      print_fidelity(pipeline.induce(min_cover), "fidelity:");
    } else if (explain->parsed()) {
      const auto summary = pipeline.explain();
      print_fidelity(summary.classifier, "classifier on test:");
      print_fidelity(summary.fidelity, "fidelity of the best rule-sets:");
      std::cout << "consistency\n";
      for (const auto& c : summary.consistency.per_class) {
        std::cout << "  " << c.name << "  rule match " << c.rule_match << "%  overlap " << c.overlap << "%  ("
                  << c.n_well_performing << " well-performing)\n";
      }
    } else if (consistency->parsed()) {
      const auto ed = pipeline.load_explained_data();
      const auto best = bind_ruleset(load_ruleset(best_file), ed.data);
      std::vector<RuleSet> others;
      for (const auto& f : other_files) others.push_back(bind_ruleset(load_ruleset(f), ed.data));
      std::cout << "rule match " << rule_match(best, others) << "%\n"
                << "classification overlap " << classification_overlap(best, others, ed.data) << "%\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
