#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "gradrules/ripper.hpp"
#include "gradrules/sparse_text.hpp"

namespace gradrules {

namespace {

using Json = nlohmann::ordered_json;

const char* op_symbol(ConditionOp op) {
  switch (op) {
    case ConditionOp::Equals: return "=";
    case ConditionOp::LessEq: return "<=";
    case ConditionOp::GreaterEq: return ">=";
  }
  return "?";
}

ConditionOp parse_op(const std::string& s) {
  if (s == "=") return ConditionOp::Equals;
  if (s == "<=") return ConditionOp::LessEq;
  if (s == ">=") return ConditionOp::GreaterEq;
  throw IoError("unknown condition operator: " + s);
}

std::string format_value(const Condition& c) {
  if (c.op == ConditionOp::Equals && c.value == std::floor(c.value)) {
    return std::to_string(static_cast<long long>(c.value));
  }
  return format_double(c.value);
}

Json condition_value(const Condition& c) {
  if (c.op == ConditionOp::Equals && c.value == std::floor(c.value)) return static_cast<long long>(c.value);
  return c.value;
}

}  // namespace

std::string ruleset_to_json(const RuleSet& ruleset, const InductionData& data) {
  Json j;
  j["class"] = ruleset.target_name;
  j["class_index"] = ruleset.target;
  Json rules = Json::array();
  for (const auto& r : ruleset.rules) {
    Json conds = Json::array();
    for (const auto& c : r.conditions) {
      conds.push_back({{"feature", data.source(c.feature)},
                       {"term", data.name(c.feature)},
                       {"op", op_symbol(c.op)},
                       {"value", condition_value(c)}});
    }
    rules.push_back({{"conditions", std::move(conds)}, {"a", r.coverage.correct}, {"b", r.coverage.covered}});
  }
  j["rules"] = std::move(rules);
  j["default"] = ruleset.default_name;
  j["default_a"] = ruleset.default_coverage.correct;
  j["default_b"] = ruleset.default_coverage.covered;
  j["config"] = {{"seed", ruleset.config.seed},
                 {"min_cover", ruleset.config.min_cover},
                 {"optimization_rounds", ruleset.config.optimization_rounds},
                 {"grow_fraction", ruleset.config.grow_fraction}};
  return j.dump(2) + "\n";
}

RuleSetDocument ruleset_from_json(std::string_view text) {
  RuleSetDocument doc;
  try {
    const auto j = Json::parse(text);
    auto& rs = doc.ruleset;
    rs.target_name = j.at("class").get<std::string>();
    rs.target = j.value("class_index", ClassIndex{0});
    for (const auto& jr : j.at("rules")) {
      Rule rule;
      for (const auto& jc : jr.at("conditions")) {
        Condition c;
        c.feature = jc.at("feature").get<std::size_t>();
        c.op = parse_op(jc.at("op").get<std::string>());
        c.value = jc.at("value").get<double>();
        doc.terms[c.feature] = jc.value("term", std::string{});
        rule.conditions.push_back(c);
      }
      rule.coverage = {jr.at("a").get<std::size_t>(), jr.at("b").get<std::size_t>()};
      rs.rules.push_back(std::move(rule));
    }
    rs.default_name = j.value("default", std::string{"others"});
    rs.default_coverage = {j.value("default_a", std::size_t{0}), j.value("default_b", std::size_t{0})};
    if (j.contains("config")) {
      const auto& jc = j.at("config");
      rs.config.seed = jc.value("seed", rs.config.seed);
      rs.config.min_cover = jc.value("min_cover", rs.config.min_cover);
      rs.config.optimization_rounds = jc.value("optimization_rounds", rs.config.optimization_rounds);
      rs.config.grow_fraction = jc.value("grow_fraction", rs.config.grow_fraction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed rule-set JSON: ") + e.what());
  }
  return doc;
}

RuleSetDocument load_ruleset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ruleset_from_json(ss.str());
}

RuleSet bind_ruleset(const RuleSetDocument& doc, const InductionData& data) {
  RuleSet rs = doc.ruleset;
  for (auto& rule : rs.rules) {
    for (auto& c : rule.conditions) {
      const auto col = data.column_of_source(static_cast<FeatureIndex>(c.feature));
      if (!col) throw Error("rule references feature " + std::to_string(c.feature) + " which is not selected");
      c.feature = *col;
    }
  }
  return rs;
}

std::string render_ruleset(const RuleSet& ruleset, const std::function<std::string(std::size_t)>& name_of) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ruleset.rules.size(); ++i) {
    const auto& r = ruleset.rules[i];
    out << (i == 0 ? "if " : "elif ");
    for (std::size_t k = 0; k < r.conditions.size(); ++k) {
      const auto& c = r.conditions[k];
      if (k > 0) out << " and ";
      out << '(' << name_of(c.feature) << ' ' << op_symbol(c.op) << ' ' << format_value(c) << ')';
    }
    out << " ⇒ " << ruleset.target_name << " (" << r.coverage.correct << '/' << r.coverage.covered << ")\n";
  }
  out << "else: " << ruleset.default_name << " (" << ruleset.default_coverage.correct
      << '/' << ruleset.default_coverage.covered << ")\n";
  return out.str();
}

std::string render_ruleset(const RuleSet& ruleset, const InductionData& data) {
  return render_ruleset(ruleset, [&](std::size_t f) { return data.name(f); });
}

std::string render_ruleset(const RuleSetDocument& doc) {
  return render_ruleset(doc.ruleset, [&](std::size_t f) {
    const auto it = doc.terms.find(f);
    return it == doc.terms.end() || it->second.empty() ? "f" + std::to_string(f) : it->second;
  });
}

}  // namespace gradrules
