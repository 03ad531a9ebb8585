#pragma once

#include "ddc/bellman.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace ddc {

enum class Formulation { W, EV };
enum class Method { VFI, Newton };

inline const char* to_string(Formulation f) { return f == Formulation::W ? "W" : "EV"; }
inline const char* to_string(Method m) { return m == Method::VFI ? "VFI" : "Newton"; }

/**
 * When the polyalgorithm hands over from successive approximations to Newton.
 *
 * fixed_count: exactly vfi_iters VFI steps (zero gives pure Newton).
 * threshold:   switch as soon as the iterate change drops below
 *              sup_diff_threshold, or after vfi_iters VFI steps.
 */
struct SwitchRule {
  enum class Kind { fixed_count, threshold };

  Kind kind = Kind::threshold;
  long vfi_iters = 20;
  double sup_diff_threshold = 1.0;

  static SwitchRule fixed_count(long k) { return {Kind::fixed_count, k, 0.0}; }
  static SwitchRule threshold(double t, long max_vfi = 20) { return {Kind::threshold, max_vfi, t}; }
};

struct SolveOptions {
  double tol_fixed_point = 1e-13;
  double tol_residual = 1e-12;
  long max_iters = 1000;
  SwitchRule switch_rule;
  bool record_trace = true;
};

struct TraceRow {
  long k = 0;
  Method method = Method::VFI;
  double sup_diff = 0.0;   // ||x_k - x_{k-1}||_inf
  double residual = 0.0;   // ||x_k - T(x_k)||_inf
  double step_time_s = 0.0;
};

struct SolveTrace {
  std::vector<TraceRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  const TraceRow& back() const { return rows.back(); }
};

/// Writes the trace as CSV: k,method,sup_diff,residual,step_time_s.
inline void write_trace_csv(std::ostream& os, const SolveTrace& trace) {
  os << "k,method,sup_diff,residual,step_time_s\n";
  char buf[160];
  for (const auto& r : trace.rows) {
    std::snprintf(buf, sizeof buf, "%ld,%s,%.17g,%.17g,%.9g\n", r.k, to_string(r.method),
                  r.sup_diff, r.residual, r.step_time_s);
    os << buf;
  }
}

template <typename Scalar = double>
struct SolveResult {
  Formulation formulation = Formulation::W;
  Index n_choices = 0;
  Index n_states = 0;
  VectorX<Scalar> solution;  // W, or the flat EV stack
  bool converged = false;
  long iterations = 0;
  Scalar final_sup_diff = std::numeric_limits<Scalar>::infinity();
  Scalar final_residual = std::numeric_limits<Scalar>::infinity();
  SolveTrace trace;
  CCPMatrix<Scalar> ccp;

  const std::type_identity_t<WVector<Scalar>>& w() const {
    if (formulation != Formulation::W) throw DomainError("SolveResult holds an EV solution");
    return solution;
  }
  EVStack<Scalar> ev() const {
    if (formulation != Formulation::EV) throw DomainError("SolveResult holds a W solution");
    return EVStack<Scalar>(n_choices, n_states, solution);
  }
};

/// x - (I - derivative)^{-1} (x - Tx), by dense LU with partial pivoting.
template <typename Scalar>
VectorX<Scalar> newton_update(const VectorX<Scalar>& x, const VectorX<Scalar>& Tx,
                              const MatrixX<Scalar>& derivative) {
  MatrixX<Scalar> system = -derivative;
  system.diagonal().array() += Scalar(1);
  Eigen::PartialPivLU<MatrixX<Scalar>> lu(system);
  if (!(lu.rcond() > std::numeric_limits<Scalar>::epsilon()))
    throw NumericError("Newton system I - T' is numerically singular", -1);
  return x - lu.solve(x - Tx);
}

namespace detail {

template <typename Scalar>
struct WProblem {
  const ModelSpec<Scalar>& spec;

  static constexpr Formulation formulation = Formulation::W;

  VectorX<Scalar> apply(const VectorX<Scalar>& w) const { return apply_lambda(spec, w); }

  VectorX<Scalar> newton(const VectorX<Scalar>& w, const VectorX<Scalar>& Tw) const {
    return newton_update<Scalar>(w, Tw, frechet_lambda(spec, w));
  }

  CCPMatrix<Scalar> ccp(const VectorX<Scalar>& w) const { return ccp_from_w(spec, w); }
};

template <typename Scalar>
struct EVProblem {
  const ModelSpec<Scalar>& spec;

  static constexpr Formulation formulation = Formulation::EV;

  EVStack<Scalar> wrap(const VectorX<Scalar>& flat) const {
    return EVStack<Scalar>(spec.n_choices, spec.n_states, flat);
  }

  VectorX<Scalar> apply(const VectorX<Scalar>& ev) const {
    return apply_gamma(spec, wrap(ev)).flat();
  }

  VectorX<Scalar> newton(const VectorX<Scalar>& ev, const VectorX<Scalar>& Tev) const {
    return newton_update<Scalar>(ev, Tev, frechet_gamma(spec, wrap(ev)));
  }

  CCPMatrix<Scalar> ccp(const VectorX<Scalar>& ev) const { return ccp_from_ev(spec, wrap(ev)); }
};

template <typename Scalar>
bool all_finite(const VectorX<Scalar>& v) {
  return v.array().isFinite().all();
}

enum class Mode { vfi_only, hybrid };

template <typename Scalar, typename Problem>
SolveResult<Scalar> run(const Problem& problem, VectorX<Scalar> x, const SolveOptions& opts,
                        Mode mode) {
  using clock = std::chrono::steady_clock;
  if (opts.max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(opts.tol_fixed_point > 0) || !(opts.tol_residual > 0))
    throw DomainError("tolerances must be positive");
  if (!all_finite(x)) throw NumericError("starting iterate is not finite", 0);

  SolveResult<Scalar> result;
  result.formulation = Problem::formulation;
  result.n_choices = problem.spec.n_choices;
  result.n_states = problem.spec.n_states;

  const auto& rule = opts.switch_rule;
  auto should_switch = [&](long vfi_done, Scalar sup_diff) {
    if (mode != Mode::hybrid) return false;
    if (vfi_done >= rule.vfi_iters) return true;
    return rule.kind == SwitchRule::Kind::threshold && sup_diff < Scalar(rule.sup_diff_threshold);
  };

  Method method = should_switch(0, std::numeric_limits<Scalar>::infinity()) ? Method::Newton
                                                                            : Method::VFI;
  VectorX<Scalar> Tx = problem.apply(x);
  long vfi_done = 0;
  Scalar prev_newton_diff = std::numeric_limits<Scalar>::infinity();
  bool stopped = false;

  for (long k = 1; k <= opts.max_iters; ++k) {
    const auto t0 = clock::now();
    VectorX<Scalar> x_new;
    try {
      x_new = method == Method::VFI ? Tx : problem.newton(x, Tx);
    } catch (const NumericError& e) {
      throw NumericError(e.reason(), k);
    }
    if (!all_finite(x_new)) throw NumericError("iterate is not finite", k);
    VectorX<Scalar> Tx_new = problem.apply(x_new);
    if (!all_finite(Tx_new)) throw NumericError("operator value is not finite", k);
    const auto t1 = clock::now();

    const Scalar sup_diff = (x_new - x).template lpNorm<Eigen::Infinity>();
    const Scalar residual = (x_new - Tx_new).template lpNorm<Eigen::Infinity>();
    if (opts.record_trace)
      result.trace.rows.push_back({k, method, double(sup_diff), double(residual),
                                   std::chrono::duration<double>(t1 - t0).count()});
    x = std::move(x_new);
    Tx = std::move(Tx_new);
    result.iterations = k;
    result.final_sup_diff = sup_diff;
    result.final_residual = residual;

    if (sup_diff <= Scalar(opts.tol_fixed_point)) {
      stopped = true;
      break;
    }
    if (method == Method::VFI) {
      // The next successive approximation would move by exactly this residual.
      if (residual <= Scalar(opts.tol_fixed_point)) {
        stopped = true;
        break;
      }
      ++vfi_done;
      if (should_switch(vfi_done, sup_diff)) method = Method::Newton;
    } else {
      // Newton has hit the rounding floor: residual is small and steps no longer shrink.
      if (residual <= Scalar(opts.tol_residual) && sup_diff >= prev_newton_diff) {
        stopped = true;
        break;
      }
      prev_newton_diff = sup_diff;
    }
  }

  result.converged = stopped && result.final_residual <= Scalar(opts.tol_residual);
  result.ccp = problem.ccp(x);
  result.solution = std::move(x);
  return result;
}

}  // namespace detail

/// Successive approximations on the integrated value function.
template <typename Scalar>
SolveResult<Scalar> vfi(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& start,
                        const SolveOptions& opts = {}) {
  detail::check_w(spec, start, "vfi");
  return detail::run<Scalar>(detail::WProblem<Scalar>{spec}, start, opts, detail::Mode::vfi_only);
}

/// Successive approximations on the stacked expected value functions.
template <typename Scalar>
SolveResult<Scalar> vfi(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& start,
                        const SolveOptions& opts = {}) {
  detail::check_ev(spec, start, "vfi");
  return detail::run<Scalar>(detail::EVProblem<Scalar>{spec}, start.flat(), opts,
                             detail::Mode::vfi_only);
}

template <typename Scalar>
SolveResult<Scalar> vfi(const ModelSpec<Scalar>& spec, Formulation formulation,
                        const SolveOptions& opts = {}) {
  if (formulation == Formulation::W)
    return vfi(spec, WVector<Scalar>(WVector<Scalar>::Zero(spec.n_states)), opts);
  return vfi(spec, EVStack<Scalar>(spec.n_choices, spec.n_states), opts);
}

/// One Newton-Kantorovich step on W - Lambda(W) = 0, an n_states system.
template <typename Scalar>
WVector<Scalar> newton_step_w(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& w) {
  detail::check_w(spec, w, "newton_step_w");
  return detail::WProblem<Scalar>{spec}.newton(w, apply_lambda(spec, w));
}

/// One Newton-Kantorovich step on EV - Gamma(EV) = 0, a J n_states system.
template <typename Scalar>
EVStack<Scalar> newton_step_ev(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& ev) {
  detail::check_ev(spec, ev, "newton_step_ev");
  return EVStack<Scalar>(spec.n_choices, spec.n_states,
                         newton_update<Scalar>(ev.flat(), apply_gamma(spec, ev).flat(),
                                               frechet_gamma(spec, ev)));
}

/// VFI until the switch rule fires, then Newton steps, starting from `start`.
template <typename Scalar>
SolveResult<Scalar> poly_solve(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& start,
                               const SolveOptions& opts = {}) {
  detail::check_w(spec, start, "poly_solve");
  return detail::run<Scalar>(detail::WProblem<Scalar>{spec}, start, opts, detail::Mode::hybrid);
}

template <typename Scalar>
SolveResult<Scalar> poly_solve(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& start,
                               const SolveOptions& opts = {}) {
  detail::check_ev(spec, start, "poly_solve");
  return detail::run<Scalar>(detail::EVProblem<Scalar>{spec}, start.flat(), opts,
                             detail::Mode::hybrid);
}

/// Polyalgorithm from the zero iterate.
template <typename Scalar>
SolveResult<Scalar> poly_solve(const ModelSpec<Scalar>& spec, Formulation formulation,
                               const SolveOptions& opts = {}) {
  if (formulation == Formulation::W)
    return poly_solve(spec, WVector<Scalar>(WVector<Scalar>::Zero(spec.n_states)), opts);
  return poly_solve(spec, EVStack<Scalar>(spec.n_choices, spec.n_states), opts);
}

// ---------------------------------------------------------------------------
// Reduced Newton step for regenerative binary models (bus engine replacement).
//
// When every row of F(2) equals row 0 of F(1), EV_2(x) = EV_1(0) for all x at
// any iterate of the form EV_j = F(j) m, so the solution is carried by EV_1
// alone and the Newton system is n_states x n_states.
// ---------------------------------------------------------------------------

/// True when the model has two choices and every row of F(2) equals row 0 of F(1).
template <typename Scalar>
bool is_regenerative_bus(const ModelSpec<Scalar>& spec, Scalar tol = Scalar(1e-12)) {
  if (spec.n_choices != 2 || spec.transitions.size() != 2) return false;
  const auto& keep = spec.transitions[0];
  const auto& replace = spec.transitions[1];
  if (keep.rows() != spec.n_states || replace.rows() != spec.n_states) return false;
  for (Index x = 0; x < spec.n_states; ++x)
    if ((replace.row(x) - keep.row(0)).template lpNorm<Eigen::Infinity>() > tol) return false;
  return true;
}

namespace detail {

template <typename Scalar>
void require_regenerative_bus(const ModelSpec<Scalar>& spec, const std::type_identity_t<VectorX<Scalar>>& ev1,
                              const char* op) {
  if (spec.n_choices != 2)
    throw DomainError(std::string(op) + ": requires a binary-choice model, got J=" +
                      std::to_string(spec.n_choices));
  if (!is_regenerative_bus(spec))
    throw DomainError(std::string(op) +
                      ": replacement transition rows must all equal row 0 of the keep transition");
  check_w(spec, ev1, op);
}

template <typename Scalar>
MatrixX<Scalar> reduced_choice_values(const ModelSpec<Scalar>& spec, const std::type_identity_t<VectorX<Scalar>>& ev1) {
  MatrixX<Scalar> v = spec.utility;
  v.row(0) += spec.beta * ev1.transpose();
  v.row(1).array() += spec.beta * ev1(0);
  return v;
}

template <typename Scalar>
struct ReducedBusProblem {
  const ModelSpec<Scalar>& spec;

  static constexpr Formulation formulation = Formulation::EV;

  VectorX<Scalar> apply(const std::type_identity_t<VectorX<Scalar>>& ev1) const {
    return spec.transitions[0] * logsumexp_cols(reduced_choice_values(spec, ev1));
  }

  MatrixX<Scalar> derivative(const CCPMatrix<Scalar>& ccp) const {
    // beta F(1) (diag(P(1)) + P(2) e_0^T)
    MatrixX<Scalar> d = spec.transitions[0] * (spec.beta * ccp.row(0).transpose()).asDiagonal();
    d.col(0).noalias() += spec.beta * (spec.transitions[0] * ccp.row(1).transpose());
    return d;
  }

  VectorX<Scalar> newton(const std::type_identity_t<VectorX<Scalar>>& ev1, const VectorX<Scalar>& Tev1) const {
    return newton_update<Scalar>(ev1, Tev1, derivative(ccp(ev1)));
  }

  CCPMatrix<Scalar> ccp(const std::type_identity_t<VectorX<Scalar>>& ev1) const {
    return softmax_cols(reduced_choice_values(spec, ev1));
  }
};

}  // namespace detail

/// Reduced expected Bellman operator acting on EV_1 with EV_2 fixed at EV_1(0).
template <typename Scalar>
VectorX<Scalar> apply_gamma_reduced_bus(const ModelSpec<Scalar>& spec, const std::type_identity_t<VectorX<Scalar>>& ev1) {
  detail::require_regenerative_bus(spec, ev1, "apply_gamma_reduced_bus");
  return detail::ReducedBusProblem<Scalar>{spec}.apply(ev1);
}

/// Derivative of the reduced operator: beta F(1) (diag(P(1)) + P(2) e_0^T).
template <typename Scalar>
MatrixX<Scalar> frechet_gamma_reduced_bus(const ModelSpec<Scalar>& spec,
                                          const std::type_identity_t<VectorX<Scalar>>& ev1) {
  detail::require_regenerative_bus(spec, ev1, "frechet_gamma_reduced_bus");
  const detail::ReducedBusProblem<Scalar> problem{spec};
  return problem.derivative(problem.ccp(ev1));
}

template <typename Scalar>
VectorX<Scalar> newton_step_reduced_bus(const ModelSpec<Scalar>& spec, const std::type_identity_t<VectorX<Scalar>>& ev1) {
  detail::require_regenerative_bus(spec, ev1, "newton_step_reduced_bus");
  const detail::ReducedBusProblem<Scalar> problem{spec};
  return problem.newton(ev1, problem.apply(ev1));
}

/// Rebuilds the full stack from EV_1: block 0 is ev1, block 1 is constant ev1(0).
template <typename Scalar>
EVStack<Scalar> expand_reduced_bus(const ModelSpec<Scalar>& spec, const std::type_identity_t<VectorX<Scalar>>& ev1) {
  detail::require_regenerative_bus(spec, ev1, "expand_reduced_bus");
  EVStack<Scalar> ev(2, spec.n_states);
  ev.block(0) = ev1;
  ev.block(1).setConstant(ev1(0));
  return ev;
}

/// Polyalgorithm on the reduced system. The solution holds EV_1 only.
template <typename Scalar>
SolveResult<Scalar> solve_reduced_bus(const ModelSpec<Scalar>& spec, const std::type_identity_t<VectorX<Scalar>>& start,
                                      const SolveOptions& opts = {}) {
  detail::require_regenerative_bus(spec, start, "solve_reduced_bus");
  auto result = detail::run<Scalar>(detail::ReducedBusProblem<Scalar>{spec}, start, opts,
                                    detail::Mode::hybrid);
  result.n_choices = 1;
  return result;
}

}  // namespace ddc
