#pragma once

#include <json.hpp>

#include "varisect/bisect.hpp"
#include "varisect/compilation.hpp"
#include "varisect/element.hpp"
#include "varisect/oracle.hpp"
#include "varisect/score.hpp"
#include "varisect/sim.hpp"

namespace varisect {

void to_json(nlohmann::json& j, const Compilation& c);
void from_json(const nlohmann::json& j, Compilation& c);

void to_json(nlohmann::json& j, const Element& e);
void to_json(nlohmann::json& j, const ElementSet& set);

void to_json(nlohmann::json& j, const TestScore& score);
void from_json(const nlohmann::json& j, TestScore& score);

void to_json(nlohmann::json& j, const Finding& finding);
void to_json(nlohmann::json& j, const SearchLevel& level);
void to_json(nlohmann::json& j, const BisectReport& report);

void to_json(nlohmann::json& j, const OracleVerdict& verdict);

namespace sim {
void to_json(nlohmann::json& j, const InjectionRecord& record);
void to_json(nlohmann::json& j, const InjectionCampaignResult& result);
}  // namespace sim

}  // namespace varisect
