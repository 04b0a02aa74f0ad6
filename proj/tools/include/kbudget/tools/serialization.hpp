#pragma once

#include <json.hpp>

#include "kbudget/instances.hpp"
#include "kbudget/kkmc.hpp"
#include "kbudget/mog.hpp"
#include "kbudget/oracle.hpp"

namespace kbudget {

void to_json(nlohmann::json& j, const QueryReport& r);
void to_json(nlohmann::json& j, const Clustering& c);
void from_json(const nlohmann::json& j, Clustering& c);
void to_json(nlohmann::json& j, const CostBreakdown& c);
void to_json(nlohmann::json& j, const InstanceParams& p);
void from_json(const nlohmann::json& j, InstanceParams& p);
void to_json(nlohmann::json& j, const MogConfig& c);
void from_json(const nlohmann::json& j, MogConfig& c);

/// {assignment, cost, query_report, stage_timings} plus the derived sizes.
nlohmann::json mog_result_json(const MogResult& result, const CostBreakdown& cost);

}  // namespace kbudget
