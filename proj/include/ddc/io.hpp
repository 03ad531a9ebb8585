#pragma once

#include "ddc/models.hpp"
#include "ddc/mpec.hpp"
#include "ddc/solvers.hpp"

#include <json.hpp>

#include <string>

namespace ddc {

using json = nlohmann::json;

json to_json(const ModelSpec<double>& spec);
ModelSpec<double> model_from_json(const json& j);

json to_json(const BusModelConfig& cfg);
BusModelConfig bus_config_from_json(const json& j);

json to_json(const StorableGoodsConfig& cfg);
StorableGoodsConfig storable_config_from_json(const json& j);

json to_json(const SystemComparison& cmp);
json to_json(const BusDiagnostics& d);

/// Solution summary written by the CLI's solve subcommand.
json to_json(const SolveResult<double>& result);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace ddc
