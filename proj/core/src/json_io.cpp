#include "varisect/json_io.hpp"

namespace varisect {

using nlohmann::json;

void to_json(json& j, const Compilation& c) {
  j = json{{"compiler", c.compiler_id},
           {"level", c.optimization_level},
           {"switches", c.switches},
           {"id", c.display()}};
}

void from_json(const json& j, Compilation& c) {
  j.at("compiler").get_to(c.compiler_id);
  j.at("level").get_to(c.optimization_level);
  j.at("switches").get_to(c.switches);
}

void to_json(json& j, const Element& e) {
  j = json{{"kind", e.kind == ElementKind::File ? "file" : "symbol"},
           {"file", e.file}};
  if (e.kind == ElementKind::Symbol) {
    j["symbol"] = e.symbol;
    j["exported"] = e.exported;
    if (!e.display_name.empty()) j["display"] = e.display_name;
  }
}

void to_json(json& j, const ElementSet& set) {
  j = json::array();
  for (const auto& e : set) j.push_back(e);
}

void to_json(json& j, const TestScore& score) {
  j = json{{"value", score.value}, {"meta", to_string(score.meta)}};
  if (!score.diagnostics.empty()) j["diagnostics"] = score.diagnostics;
}

void from_json(const json& j, TestScore& score) {
  score.value = j.value("value", 0.0);
  std::string meta = j.value("meta", "measured");
  if (meta == "measured") score.meta = ScoreMeta::Measured;
  else if (meta == "build-failure") score.meta = ScoreMeta::BuildFailure;
  else score.meta = ScoreMeta::RunFailure;
  score.diagnostics = j.value("diagnostics", "");
}

void to_json(json& j, const Finding& finding) {
  j = json{{"element", finding.element}, {"score", finding.score}};
}

void to_json(json& j, const SearchLevel& level) {
  j = json{{"label", level.label},
           {"universe_size", level.universe_size},
           {"found_count", level.found_count},
           {"distinct_evaluations", level.distinct_evaluations}};
}

void to_json(json& j, const BisectReport& report) {
  j = json{{"found", report.found},
           {"search_space_size", report.search_space_size},
           {"distinct_evaluations", report.distinct_evaluations},
           {"total_calls", report.total_calls},
           {"assertion_status", to_string(report.assertion_status)},
           {"possible_false_negatives", report.possible_false_negatives},
           {"levels", report.levels}};
  json violated = json::array();
  for (auto a : report.violated_assumptions) violated.push_back(to_string(a));
  j["violated_assumptions"] = std::move(violated);
  json flo = json::array();
  for (const auto& e : report.file_level_only) flo.push_back(e);
  j["file_level_only"] = std::move(flo);
}

void to_json(json& j, const OracleVerdict& verdict) {
  j = json{{"av_set", verdict.av_set},
           {"minimal_sets", verdict.minimal_sets},
           {"unique_minimal", verdict.unique_minimal}};
}

namespace sim {

void to_json(json& j, const InjectionRecord& record) {
  j = json{{"seed", record.instance_seed},
           {"outcome", to_string(record.outcome)},
           {"distinct_evaluations", record.distinct_evaluations},
           {"assertion_status", to_string(record.assertion_status)},
           {"expected", record.expected},
           {"found", record.found},
           {"levels", record.levels}};
}

void to_json(json& j, const InjectionCampaignResult& result) {
  j = json{{"seed", result.config.seed},
           {"files", result.config.n_files},
           {"symbols_per_file", result.config.symbols_per_file},
           {"count", result.config.count},
           {"mode", to_string(result.config.mode)},
           {"exact_finds", result.exact_finds},
           {"indirect_finds", result.indirect_finds},
           {"wrong_finds", result.wrong_finds},
           {"missed_finds", result.missed_finds},
           {"not_measurable", result.not_measurable},
           {"assertion_violations", result.assertion_violations},
           {"search_failures", result.search_failures},
           {"records", result.records}};
  if (result.config.k) j["k"] = *result.config.k;
  if (result.precision) j["precision"] = *result.precision;
  if (result.recall) j["recall"] = *result.recall;
  if (result.mean_evaluations) j["mean_evaluations"] = *result.mean_evaluations;
}

}  // namespace sim

}  // namespace varisect
