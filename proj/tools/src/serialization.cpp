#include "kbudget/tools/serialization.hpp"

namespace kbudget {

void to_json(nlohmann::json& j, const QueryReport& r) {
  j = nlohmann::json{{"distinct_entries", r.distinct_entries},
                     {"total_requests", r.total_requests},
                     {"budget", r.budget ? nlohmann::json(*r.budget) : nlohmann::json(nullptr)},
                     {"budget_exhausted", r.budget_exhausted}};
}

void to_json(nlohmann::json& j, const Clustering& c) { j = c.assignment(); }

void from_json(const nlohmann::json& j, Clustering& c) {
  c = Clustering(j.get<std::vector<std::size_t>>());
}

void to_json(nlohmann::json& j, const CostBreakdown& c) {
  j = nlohmann::json{{"total", c.total}, {"per_cluster", c.per_cluster}};
}

void to_json(nlohmann::json& j, const InstanceParams& p) {
  j = nlohmann::json{{"type", to_string(p.type)}, {"n", p.n},
                     {p.type == InstanceType::krr ? "J" : "k", p.k_or_J},
                     {"epsilon", p.epsilon}, {"sigma", p.sigma}, {"d", p.d},
                     {"separation", p.separation}, {"seed", p.seed},
                     {"augmented", p.augmented}};
}

void from_json(const nlohmann::json& j, InstanceParams& p) {
  p = InstanceParams{};
  p.type = instance_type_from_string(j.at("type").get<std::string>());
  p.n = j.value("n", std::size_t{0});
  const char* size_key = p.type == InstanceType::krr ? "J" : "k";
  p.k_or_J = j.contains(size_key) ? j.at(size_key).get<std::size_t>()
                                  : j.value("k_or_J", std::size_t{0});
  p.epsilon = j.value("epsilon", p.epsilon);
  p.sigma = j.value("sigma", p.sigma);
  p.d = j.value("d", p.d);
  p.separation = j.value("separation", p.separation);
  p.seed = j.value("seed", p.seed);
  p.augmented = j.value("augmented", p.augmented);
}

void to_json(nlohmann::json& j, const MogConfig& c) {
  j = nlohmann::json{{"k", c.k},
                     {"epsilon", c.epsilon},
                     {"sigma", c.sigma},
                     {"d", c.d},
                     {"C_sketch", c.c_sketch},
                     {"delta_exponent", c.delta_exponent},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, MogConfig& c) {
  c = MogConfig{};
  c.k = j.at("k").get<std::size_t>();
  c.epsilon = j.at("epsilon").get<double>();
  c.sigma = j.at("sigma").get<double>();
  c.d = j.at("d").get<std::size_t>();
  c.c_sketch = j.value("C_sketch", c.c_sketch);
  c.delta_exponent = j.value("delta_exponent", c.delta_exponent);
  c.seed = j.value("seed", c.seed);
}

nlohmann::json mog_result_json(const MogResult& result, const CostBreakdown& cost) {
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& s : result.stage_timings) timings[s.stage] = s.seconds;
  return nlohmann::json{{"assignment", result.clustering},
                        {"cost", cost},
                        {"query_report", result.report},
                        {"stage_timings", timings},
                        {"t", result.t},
                        {"m", result.m},
                        {"frame_rank", result.frame_rank},
                        {"fallbacks", result.fallbacks}};
}

}  // namespace kbudget
