#include "ddc/io.hpp"

#include <fstream>

namespace ddc {
namespace {

json matrix_to_json(const MatrixX<double>& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Accepts nested rows or a flat row-major array.
MatrixX<double> matrix_from_json(const json& j, Index rows, Index cols, const std::string& what) {
  if (!j.is_array()) throw DomainError(what + " must be an array");
  MatrixX<double> m(rows, cols);
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<Index>(j.size()) != rows)
      throw DomainError(what + ": expected " + std::to_string(rows) + " rows");
    for (Index r = 0; r < rows; ++r) {
      const auto& row = j[r];
      if (!row.is_array() || static_cast<Index>(row.size()) != cols)
        throw DomainError(what + ": row " + std::to_string(r) + " must have " +
                          std::to_string(cols) + " entries");
      for (Index c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
    }
  } else {
    if (static_cast<Index>(j.size()) != rows * cols)
      throw DomainError(what + ": expected " + std::to_string(rows * cols) + " entries");
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = j[r * cols + c].get<double>();
  }
  return m;
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw DomainError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const ModelSpec<double>& spec) {
  json j;
  j["n_states"] = spec.n_states;
  j["n_choices"] = spec.n_choices;
  j["beta"] = spec.beta;
  j["utility"] = matrix_to_json(spec.utility);
  json transitions = json::array();
  for (const auto& F : spec.transitions) transitions.push_back(matrix_to_json(F));
  j["transitions"] = std::move(transitions);
  return j;
}

ModelSpec<double> model_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("model JSON must be an object");
  ModelSpec<double> spec;
  spec.n_states = required<Index>(j, "n_states");
  spec.n_choices = required<Index>(j, "n_choices");
  spec.beta = required<double>(j, "beta");
  if (spec.n_states < 1 || spec.n_choices < 1)
    throw DomainError("n_states and n_choices must be positive");
  if (!j.contains("utility")) throw DomainError("missing field 'utility'");
  if (!j.contains("transitions")) throw DomainError("missing field 'transitions'");
  try {
    spec.utility = matrix_from_json(j["utility"], spec.n_choices, spec.n_states, "utility");
    const auto& tr = j["transitions"];
    if (!tr.is_array() || static_cast<Index>(tr.size()) != spec.n_choices)
      throw DomainError("transitions must be an array of n_choices matrices");
    for (Index a = 0; a < spec.n_choices; ++a)
      spec.transitions.push_back(matrix_from_json(tr[a], spec.n_states, spec.n_states,
                                                  "transitions[" + std::to_string(a) + "]"));
  } catch (const json::exception& e) {
    throw DomainError(std::string("model JSON: ") + e.what());
  }
  return spec;
}

json to_json(const BusModelConfig& cfg) {
  return json{{"n_states", cfg.n_states},     {"jump_probs", cfg.jump_probs},
              {"rc", cfg.rc},                 {"theta_cost", cfg.theta_cost},
              {"beta", cfg.beta},             {"variant", to_string(cfg.variant)}};
}

BusModelConfig bus_config_from_json(const json& j) {
  BusModelConfig cfg;
  cfg.n_states = required<Index>(j, "n_states");
  cfg.jump_probs = required<std::vector<double>>(j, "jump_probs");
  cfg.rc = required<double>(j, "rc");
  cfg.theta_cost = required<double>(j, "theta_cost");
  cfg.beta = required<double>(j, "beta");
  cfg.variant = bus_variant_from_string(required<std::string>(j, "variant"));
  return cfg;
}

json to_json(const StorableGoodsConfig& cfg) {
  return json{{"inventory_levels", cfg.inventory_levels},
              {"price_levels", cfg.price_levels},
              {"price_transition", cfg.price_transition},
              {"consumption_utility", cfg.consumption_utility},
              {"holding_cost", cfg.holding_cost},
              {"prices", cfg.prices},
              {"beta", cfg.beta}};
}

StorableGoodsConfig storable_config_from_json(const json& j) {
  StorableGoodsConfig cfg;
  cfg.inventory_levels = required<Index>(j, "inventory_levels");
  if (j.contains("price_levels")) cfg.price_levels = required<Index>(j, "price_levels");
  cfg.price_transition = required<std::vector<std::vector<double>>>(j, "price_transition");
  cfg.consumption_utility = required<double>(j, "consumption_utility");
  cfg.holding_cost = required<double>(j, "holding_cost");
  cfg.prices = required<std::vector<double>>(j, "prices");
  cfg.beta = required<double>(j, "beta");
  return cfg;
}

json to_json(const SystemComparison& cmp) {
  return json{
      {"formulation_w", {{"n_constraints", cmp.w.n_constraints}, {"jacobian_nnz", cmp.w.jacobian_nnz}}},
      {"formulation_ev", {{"n_constraints", cmp.ev.n_constraints}, {"jacobian_nnz", cmp.ev.jacobian_nnz}}},
      {"ratio_constraints", cmp.ratio_constraints},
      {"ratio_nnz", cmp.ratio_nnz}};
}

json to_json(const BusDiagnostics& d) {
  return json{{"ev2_constant", d.ev2_constant}, {"identity_holds", d.identity_holds}, {"gap", d.gap}};
}

json to_json(const SolveResult<double>& result) {
  json j;
  j["formulation"] = to_string(result.formulation);
  j["n_states"] = result.n_states;
  j["n_choices"] = result.n_choices;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["final_sup_diff"] = result.final_sup_diff;
  j["final_residual"] = result.final_residual;
  j["solution"] = std::vector<double>(result.solution.data(),
                                      result.solution.data() + result.solution.size());
  j["ccp"] = matrix_to_json(result.ccp);
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace ddc
