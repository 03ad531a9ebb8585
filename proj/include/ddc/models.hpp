#pragma once

#include "ddc/model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ddc {

// ---------------------------------------------------------------------------
// Bus engine replacement
// ---------------------------------------------------------------------------

enum class BusVariant {
  corrected,             // replacement row = row 0 of the keep transition
  rust_original_faulty,  // replacement sends all mass to state 0
};

inline const char* to_string(BusVariant v) {
  return v == BusVariant::corrected ? "corrected" : "rust_original_faulty";
}

inline BusVariant bus_variant_from_string(const std::string& s) {
  if (s == "corrected") return BusVariant::corrected;
  if (s == "rust_original_faulty") return BusVariant::rust_original_faulty;
  throw DomainError("unknown bus variant '" + s + "'");
}

struct BusModelConfig {
  Index n_states = 90;
  std::vector<double> jump_probs{0.36, 0.48, 0.16};
  double rc = 10.0;
  double theta_cost = 2.5;
  double beta = 0.9999;
  BusVariant variant = BusVariant::corrected;
};

inline void validate(const BusModelConfig& cfg) {
  if (cfg.n_states < 1) throw DomainError("bus model: n_states must be positive");
  if (cfg.jump_probs.empty()) throw DomainError("bus model: jump_probs is empty");
  if (static_cast<Index>(cfg.jump_probs.size()) >= cfg.n_states)
    throw DomainError("bus model: need len(jump_probs) < n_states");
  double sum = 0.0;
  for (double p : cfg.jump_probs) {
    if (!(p >= 0.0)) throw DomainError("bus model: negative jump probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("bus model: jump_probs must sum to 1");
  if (!(cfg.rc > 0.0)) throw DomainError("bus model: rc must be positive");
  if (!(cfg.theta_cost > 0.0)) throw DomainError("bus model: theta_cost must be positive");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw DomainError("bus model: beta not in [0,1)");
}

/**
 * Bus engine replacement model. Choice 0 keeps the engine, choice 1
 * replaces it.
 *
 * Keep: row x puts jump_probs[i] on state min(x + i, n - 1), so mass that would
 * leave the grid accumulates in the last column and the last state absorbs.
 * Replace: every row is (p_1, ..., p_m, 0, ...) for the corrected variant and
 * (1, 0, ..., 0) for the faulty one.
 *
 * u(keep, x) = -theta_cost * x / n, u(replace, x) = -rc - theta_cost * c(0).
 */
template <typename Scalar = double>
ModelSpec<Scalar> build_bus_model(const BusModelConfig& cfg) {
  validate(cfg);
  const Index n = cfg.n_states;
  const Index m = static_cast<Index>(cfg.jump_probs.size());
  auto cost = [&](Index x) { return Scalar(cfg.theta_cost) * Scalar(x) / Scalar(n); };

  ModelSpec<Scalar> spec;
  spec.n_states = n;
  spec.n_choices = 2;
  spec.beta = Scalar(cfg.beta);
  spec.utility.resize(2, n);
  for (Index x = 0; x < n; ++x) {
    spec.utility(0, x) = -cost(x);
    spec.utility(1, x) = -Scalar(cfg.rc) - cost(0);
  }

  MatrixX<Scalar> keep = MatrixX<Scalar>::Zero(n, n);
  for (Index x = 0; x < n; ++x)
    for (Index i = 0; i < m; ++i) keep(x, std::min(x + i, n - 1)) += Scalar(cfg.jump_probs[i]);

  MatrixX<Scalar> replace = MatrixX<Scalar>::Zero(n, n);
  if (cfg.variant == BusVariant::corrected)
    replace.rowwise() = keep.row(0);
  else
    replace.col(0).setOnes();

  spec.transitions = {std::move(keep), std::move(replace)};
  return spec;
}

struct BusDiagnostics {
  bool ev2_constant = false;
  bool identity_holds = false;  // max_x |EV_2(x) - EV_1(0)| <= 1e-9
  double gap = 0.0;             // EV_2(0) - EV_1(0)
};

/// Checks the EV_2(x) = EV_1(0) identity at a solved bus model.
template <typename Scalar>
BusDiagnostics bus_ev2_diagnostics(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& solved) {
  if (spec.n_choices != 2 || spec.transitions.size() != 2)
    throw DomainError("bus_ev2_diagnostics: not a binary-choice model");
  if (solved.n_choices() != 2 || solved.n_states() != spec.n_states)
    throw DomainError("bus_ev2_diagnostics: EV stack does not match the model");
  const auto& replace = spec.transitions[1];
  for (Index x = 1; x < spec.n_states; ++x)
    if ((replace.row(x) - replace.row(0)).template lpNorm<Eigen::Infinity>() > Scalar(1e-12))
      throw DomainError("bus_ev2_diagnostics: replacement transition is not regenerative");

  const auto ev1 = solved.block(0);
  const auto ev2 = solved.block(1);
  BusDiagnostics d;
  d.ev2_constant = (ev2.array() - ev2(0)).abs().maxCoeff() <= Scalar(1e-10);
  d.identity_holds = (ev2.array() - ev1(0)).abs().maxCoeff() <= Scalar(1e-9);
  d.gap = double(ev2(0) - ev1(0));
  return d;
}

// ---------------------------------------------------------------------------
// Storable goods demand (three purchase quantities)
// ---------------------------------------------------------------------------

struct StorableGoodsConfig {
  Index inventory_levels = 6;
  Index price_levels = 2;
  std::vector<std::vector<double>> price_transition{{0.8, 0.2}, {0.3, 0.7}};
  double consumption_utility = 3.0;
  double holding_cost = 0.1;
  std::vector<double> prices{1.2, 0.7};
  double beta = 0.95;
};

inline constexpr Index kStorableChoices = 3;

inline void validate(const StorableGoodsConfig& cfg) {
  if (cfg.inventory_levels < 1) throw DomainError("storable model: inventory_levels must be positive");
  if (cfg.price_levels < 1) throw DomainError("storable model: price_levels must be positive");
  const auto r = static_cast<std::size_t>(cfg.price_levels);
  if (cfg.prices.size() != r) throw DomainError("storable model: need one price per price level");
  if (cfg.price_transition.size() != r)
    throw DomainError("storable model: price_transition must be price_levels x price_levels");
  for (const auto& row : cfg.price_transition) {
    if (row.size() != r)
      throw DomainError("storable model: price_transition must be price_levels x price_levels");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("storable model: price probability not in [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("storable model: price_transition row does not sum to 1");
  }
  for (double p : cfg.prices)
    if (!std::isfinite(p)) throw DomainError("storable model: non-finite price");
  if (!std::isfinite(cfg.consumption_utility) || !std::isfinite(cfg.holding_cost))
    throw DomainError("storable model: non-finite utility parameter");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw DomainError("storable model: beta not in [0,1)");
}

/// State index of (inventory, price level); inventory-major.
inline Index storable_state(const StorableGoodsConfig& cfg, Index inventory, Index price) {
  return inventory * cfg.price_levels + price;
}

/// Default configuration resized to n_states = 2 * inventory_levels.
inline StorableGoodsConfig storable_config_for_states(Index n_states) {
  StorableGoodsConfig cfg;
  if (n_states < 2 || n_states % cfg.price_levels != 0)
    throw DomainError("storable model: n_states must be a positive multiple of " +
                      std::to_string(cfg.price_levels));
  cfg.inventory_levels = n_states / cfg.price_levels;
  return cfg;
}

/**
 * Storable goods demand with J = 3: buy 0, 1 or 2 units. One unit is consumed
 * when inventory plus purchase is positive; next inventory is
 * clamp(i + buy - 1, 0, inventory_levels - 1). Flow utility is
 * consumption_utility * 1{consume} - price * buy - holding_cost * next inventory.
 * Prices follow an exogenous Markov chain.
 */
template <typename Scalar = double>
ModelSpec<Scalar> build_storable_goods_model(const StorableGoodsConfig& cfg) {
  validate(cfg);
  const Index L = cfg.inventory_levels;
  const Index R = cfg.price_levels;
  const Index n = L * R;

  ModelSpec<Scalar> spec;
  spec.n_states = n;
  spec.n_choices = kStorableChoices;
  spec.beta = Scalar(cfg.beta);
  spec.utility.resize(kStorableChoices, n);
  spec.transitions.assign(kStorableChoices, MatrixX<Scalar>::Zero(n, n));

  for (Index buy = 0; buy < kStorableChoices; ++buy) {
    auto& F = spec.transitions[buy];
    for (Index i = 0; i < L; ++i) {
      const bool consume = i + buy >= 1;
      const Index next = std::clamp<Index>(i + buy - 1, 0, L - 1);
      for (Index r = 0; r < R; ++r) {
        const Index x = storable_state(cfg, i, r);
        spec.utility(buy, x) = Scalar(consume ? cfg.consumption_utility : 0.0) -
                               Scalar(cfg.prices[r]) * Scalar(buy) -
                               Scalar(cfg.holding_cost) * Scalar(next);
        for (Index r2 = 0; r2 < R; ++r2)
          F(x, storable_state(cfg, next, r2)) = Scalar(cfg.price_transition[r][r2]);
      }
    }
  }
  return spec;
}

}  // namespace ddc
