#pragma once

#include <string>

#include <json.hpp>

#include "fglht/bootstrap.hpp"
#include "fglht/test.hpp"

namespace fglht {

inline nlohmann::json to_json(const TestReport& r) {
  nlohmann::json j;
  j["statistic"] = r.statistic;
  j["adjustment"] = r.adjustment;
  j["adjusted"] = r.adjusted;
  j["shift"] = r.approx.shift;
  j["scale"] = r.approx.scale;
  j["df"] = r.approx.df;
  j["k1"] = r.approx.k1;
  j["k2"] = r.approx.k2;
  j["k3"] = r.approx.k3;
  j["p_value"] = r.p_value;
  nlohmann::json rej = nlohmann::json::object();
  for (const auto& [alpha, reject] : r.reject_at) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", alpha);
    rej[key] = reject;
  }
  j["reject_at"] = rej;
  j["diagnostics"] = {{"ridge_events", r.diagnostics.ridge_events},
                      {"zero_points", r.diagnostics.zero_points},
                      {"grid_points", r.diagnostics.grid_points},
                      {"grid_volume", r.diagnostics.grid_volume},
                      {"groups", r.diagnostics.groups},
                      {"components", r.diagnostics.components},
                      {"sizes", r.diagnostics.sizes}};
  return j;
}

inline nlohmann::json to_json(const BootstrapReport& r,
                              bool include_replicates = true) {
  nlohmann::json j;
  j["statistic"] = r.statistic;
  j["draws"] = r.draws;
  j["p_value"] = r.p_value;
  j["seed"] = r.seed;
  if (include_replicates) j["replicates"] = r.replicates;
  return j;
}

}  // namespace fglht
