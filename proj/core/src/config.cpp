#include "gradrules/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gradrules/sparse_text.hpp"

namespace gradrules {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

double parse_real(std::string_view key, std::string_view text) {
  try {
    return parse_double(text);
  } catch (const Error&) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view text) {
  std::vector<std::size_t> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_unsigned<std::size_t>(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + std::to_string(values[i]);
  return s;
}

}  // namespace

std::string to_string(ExplainMode mode) {
  switch (mode) {
    case ExplainMode::TestPredictions: return "test-preds";
    case ExplainMode::TrainGoldOriginal: return "train-gold-original";
    case ExplainMode::TrainGoldTransformed: return "train-gold-transformed";
  }
  return "?";
}

std::string to_string(SelectorKind kind) {
  return kind == SelectorKind::SensitivityAnalysis ? "sa" : "mi";
}

ExplainMode parse_mode(std::string_view text) {
  if (text == "test-preds") return ExplainMode::TestPredictions;
  if (text == "train-gold-original") return ExplainMode::TrainGoldOriginal;
  if (text == "train-gold-transformed") return ExplainMode::TrainGoldTransformed;
  throw ConfigError("unknown mode '" + std::string(text) +
                    "' (expected test-preds, train-gold-original or train-gold-transformed)");
}

SelectorKind parse_selector(std::string_view text) {
  if (text == "sa") return SelectorKind::SensitivityAnalysis;
  if (text == "mi") return SelectorKind::MutualInformation;
  throw ConfigError("unknown selector '" + std::string(text) + "' (expected sa or mi)");
}

MinCoverGrid parse_min_cover_grid(std::string_view text) {
  text = trim(text);
  if (text == "ladder") return {MinCoverGrid::Kind::Ladder, {}};
  if (text == "full") return {MinCoverGrid::Kind::Full, {}};
  auto values = parse_list("min_cover_grid", text);
  if (values.empty()) throw ConfigError("min_cover_grid: empty list");
  for (auto v : values) {
    if (v == 0) throw ConfigError("min_cover_grid: values must be >= 1");
  }
  return {MinCoverGrid::Kind::Explicit, std::move(values)};
}

std::string to_string(const MinCoverGrid& grid) {
  switch (grid.kind) {
    case MinCoverGrid::Kind::Ladder: return "ladder";
    case MinCoverGrid::Kind::Full: return "full";
    case MinCoverGrid::Kind::Explicit: return join(grid.values);
  }
  return "?";
}

void RunConfig::validate() const {
  if (k == 0) throw ConfigError("k must be >= 1");
  if (hidden_layers.empty()) throw ConfigError("hidden_layers must name at least one layer");
  for (auto h : hidden_layers) {
    if (h == 0) throw ConfigError("hidden layer sizes must be >= 1");
  }
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (seeds == 0) throw ConfigError("seeds must be >= 1");
  if (jobs == 0) throw ConfigError("jobs must be >= 1");
  RipperConfig rc;
  rc.optimization_rounds = optimization_rounds;
  rc.grow_fraction = grow_fraction;
  rc.validate();
  if (min_cover_grid.kind == MinCoverGrid::Kind::Explicit) parse_min_cover_grid(to_string(min_cover_grid));
}

NetworkConfig RunConfig::network(std::size_t n_inputs, std::size_t n_outputs) const {
  NetworkConfig nc;
  nc.layer_sizes.push_back(n_inputs);
  nc.layer_sizes.insert(nc.layer_sizes.end(), hidden_layers.begin(), hidden_layers.end());
  nc.layer_sizes.push_back(n_outputs);
  nc.epochs = epochs;
  nc.batch_size = batch_size;
  nc.adam.learning_rate = learning_rate;
  nc.seed = seed;
  return nc;
}

SweepConfig RunConfig::sweep() const {
  SweepConfig sc;
  sc.seeds = seed_range(seed, seeds);
  sc.grid = min_cover_grid;
  sc.base.seed = seed;
  sc.base.optimization_rounds = optimization_rounds;
  sc.base.grow_fraction = grow_fraction;
  sc.jobs = jobs;
  return sc;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "corpus") c.corpus = std::string(value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "mode") c.mode = parse_mode(value);
  else if (key == "selector") c.selector = parse_selector(value);
  else if (key == "k") c.k = parse_unsigned<std::size_t>(key, value);
  else if (key == "hidden_layers") c.hidden_layers = parse_list(key, value);
  else if (key == "epochs") c.epochs = parse_unsigned<std::size_t>(key, value);
  else if (key == "batch_size") c.batch_size = parse_unsigned<std::size_t>(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_real(key, value);
  else if (key == "seeds") c.seeds = parse_unsigned<std::size_t>(key, value);
  else if (key == "min_cover_grid") c.min_cover_grid = parse_min_cover_grid(value);
  else if (key == "optimization_rounds") c.optimization_rounds = parse_unsigned<std::size_t>(key, value);
  else if (key == "grow_fraction") c.grow_fraction = parse_real(key, value);
  else if (key == "original_numeric") c.original_numeric = parse_bool(key, value);
  else if (key == "jobs") c.jobs = parse_unsigned<std::size_t>(key, value);
  else if (key == "seed") c.seed = parse_unsigned<std::uint64_t>(key, value);
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "corpus=" << c.corpus.string() << '\n'
      << "out=" << c.out.string() << '\n'
      << "mode=" << to_string(c.mode) << '\n'
      << "selector=" << to_string(c.selector) << '\n'
      << "k=" << c.k << '\n'
      << "hidden_layers=" << join(c.hidden_layers) << '\n'
      << "epochs=" << c.epochs << '\n'
      << "batch_size=" << c.batch_size << '\n'
      << "learning_rate=" << format_double(c.learning_rate) << '\n'
      << "seeds=" << c.seeds << '\n'
      << "min_cover_grid=" << to_string(c.min_cover_grid) << '\n'
      << "optimization_rounds=" << c.optimization_rounds << '\n'
      << "grow_fraction=" << format_double(c.grow_fraction) << '\n'
      << "original_numeric=" << (c.original_numeric ? "true" : "false") << '\n'
      << "jobs=" << c.jobs << '\n'
      << "seed=" << c.seed << '\n';
  return out.str();
}

}  // namespace gradrules
