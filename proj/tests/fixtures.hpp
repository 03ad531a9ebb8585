#pragma once

#include "ddc/models.hpp"
#include "ddc/solvers.hpp"

#include <cmath>
#include <vector>

namespace fixtures {

// Bus model used as the reference in solver tests. beta = 0.99 keeps value
// levels near 1e2, where double rounding on Newton iterates stays below 1e-13.
inline ddc::BusModelConfig reference_bus(ddc::Index n_states,
                                         ddc::BusVariant variant = ddc::BusVariant::corrected) {
  ddc::BusModelConfig cfg;
  cfg.n_states = n_states;
  cfg.beta = 0.99;
  cfg.variant = variant;
  return cfg;
}

inline ddc::StorableGoodsConfig reference_storable(ddc::Index n_states) {
  return ddc::storable_config_for_states(n_states);
}

/// u = 0: the fixed point is log(J) / (1 - beta) in every state.
inline ddc::ModelSpec<double> constant_model(ddc::Index n, ddc::Index J, double beta,
                                             const ddc::MatrixX<double>& F) {
  ddc::ModelSpec<double> spec;
  spec.n_states = n;
  spec.n_choices = J;
  spec.beta = beta;
  spec.utility = ddc::MatrixX<double>::Zero(J, n);
  spec.transitions.assign(J, F);
  return spec;
}

/// Natural-log superlinear check over consecutive Newton rows:
/// log e_{k+1} <= 2 log e_k + slack, skipping pairs whose successor is exactly zero.
// Pairs whose second error is already at the rounding floor carry no information
// about the rate and are skipped.
inline bool newton_tail_superlinear(const ddc::SolveTrace& trace, double slack = 10.0, double floor = 1e-12) {
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    const auto& prev = trace.rows[i - 1];
    const auto& cur = trace.rows[i];
    if (prev.method != ddc::Method::Newton || cur.method != ddc::Method::Newton) continue;
    if (cur.sup_diff <= floor) continue;
    if (!(std::log(cur.sup_diff) <= 2.0 * std::log(prev.sup_diff) + slack)) return false;
  }
  return true;
}

}  // namespace fixtures
