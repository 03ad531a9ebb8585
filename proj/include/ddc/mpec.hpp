#pragma once

#include "ddc/solvers.hpp"

#include <functional>
#include <utility>

namespace ddc {

/**
 * Equality-constraint system x = T(x) as it would enter a constrained
 * likelihood problem: one constraint per state for W, one per (choice, state)
 * for EV. Only structure and residuals; nothing is optimized here.
 */
template <typename Scalar = double>
struct ConstraintSystem {
  Formulation formulation = Formulation::W;
  Index n_constraints = 0;
  std::function<VectorX<Scalar>(const VectorX<Scalar>&)> residual;  // x - T(x)
  std::function<MatrixX<Scalar>(const VectorX<Scalar>&)> jacobian;  // I - T'(x)

  std::pair<Index, Index> jacobian_dims() const { return {n_constraints, n_constraints}; }

  /// Entries of I - T'(x) with magnitude above 1e-15.
  Index jacobian_nnz(const VectorX<Scalar>& x) const {
    return (jacobian(x).array().abs() > Scalar(1e-15)).count();
  }
};

template <typename Scalar>
ConstraintSystem<Scalar> build_constraints(const ModelSpec<Scalar>& spec, Formulation formulation) {
  require_valid(spec);
  ConstraintSystem<Scalar> sys;
  sys.formulation = formulation;
  // The closures copy the spec so the system outlives its argument.
  if (formulation == Formulation::W) {
    sys.n_constraints = spec.n_states;
    sys.residual = [spec](const VectorX<Scalar>& w) -> VectorX<Scalar> {
      return w - apply_lambda(spec, w);
    };
    sys.jacobian = [spec](const VectorX<Scalar>& w) -> MatrixX<Scalar> {
      MatrixX<Scalar> jac = -frechet_lambda(spec, w);
      jac.diagonal().array() += Scalar(1);
      return jac;
    };
  } else {
    sys.n_constraints = spec.n_choices * spec.n_states;
    sys.residual = [spec](const VectorX<Scalar>& flat) -> VectorX<Scalar> {
      const EVStack<Scalar> ev(spec.n_choices, spec.n_states, flat);
      return flat - apply_gamma(spec, ev).flat();
    };
    sys.jacobian = [spec](const VectorX<Scalar>& flat) -> MatrixX<Scalar> {
      const EVStack<Scalar> ev(spec.n_choices, spec.n_states, flat);
      MatrixX<Scalar> jac = -frechet_gamma(spec, ev);
      jac.diagonal().array() += Scalar(1);
      return jac;
    };
  }
  return sys;
}

struct SystemStats {
  Index n_constraints = 0;
  Index jacobian_nnz = 0;
};

struct SystemComparison {
  SystemStats w;
  SystemStats ev;
  double ratio_constraints = 0.0;
  double ratio_nnz = 0.0;
};

/// Solves the model (W path) and compares both constraint systems at the solution.
template <typename Scalar>
SystemComparison compare_systems(const ModelSpec<Scalar>& spec, const SolveOptions& opts = {}) {
  const auto w_sys = build_constraints(spec, Formulation::W);
  const auto ev_sys = build_constraints(spec, Formulation::EV);

  SolveOptions quiet = opts;
  quiet.record_trace = false;
  const auto solved = poly_solve(spec, Formulation::W, quiet);
  const WVector<Scalar>& w = solved.solution;
  const auto ev = ev_from_w(spec, w);

  SystemComparison cmp;
  cmp.w = {w_sys.n_constraints, w_sys.jacobian_nnz(w)};
  cmp.ev = {ev_sys.n_constraints, ev_sys.jacobian_nnz(ev.flat())};
  cmp.ratio_constraints = double(cmp.ev.n_constraints) / double(cmp.w.n_constraints);
  cmp.ratio_nnz = double(cmp.ev.jacobian_nnz) / double(cmp.w.jacobian_nnz);
  return cmp;
}

}  // namespace ddc
