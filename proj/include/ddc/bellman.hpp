#pragma once

#include "ddc/model.hpp"

#include <string>
#include <type_traits>

namespace ddc {

/// Derivative of the integrated Bellman operator, n_states x n_states.
template <typename Scalar>
using LambdaDerivative = MatrixX<Scalar>;

/// Derivative of the expected Bellman operator, (J n_states) x (J n_states).
template <typename Scalar>
using GammaDerivative = MatrixX<Scalar>;

namespace detail {

template <typename Scalar>
void check_w(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& w, const char* op) {
  if (w.size() != spec.n_states)
    throw DomainError(std::string(op) + ": W has length " + std::to_string(w.size()) +
                      ", expected " + std::to_string(spec.n_states));
}

template <typename Scalar>
void check_ev(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& ev, const char* op) {
  if (ev.n_choices() != spec.n_choices || ev.n_states() != spec.n_states ||
      ev.flat().size() != spec.n_choices * spec.n_states)
    throw DomainError(std::string(op) + ": EV stack is " + std::to_string(ev.n_choices()) + "x" +
                      std::to_string(ev.n_states()) + ", expected " +
                      std::to_string(spec.n_choices) + "x" + std::to_string(spec.n_states));
}

/// Per-state log-sum-exp over the rows (choices) of a J x n matrix.
template <typename Scalar>
VectorX<Scalar> logsumexp_cols(const MatrixX<Scalar>& values) {
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> m = values.colwise().maxCoeff();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> s =
      (values.rowwise() - m).array().exp().colwise().sum();
  return (m.array() + s.array().log()).transpose();
}

/// Per-state softmax over the rows (choices) of a J x n matrix.
template <typename Scalar>
CCPMatrix<Scalar> softmax_cols(const MatrixX<Scalar>& values) {
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> m = values.colwise().maxCoeff();
  MatrixX<Scalar> e = (values.rowwise() - m).array().exp().matrix();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> s = e.colwise().sum();
  return e.array().rowwise() / s.array();
}

}  // namespace detail

/// Choice-specific values v_j(x) = u(j, x) + beta (F(j) W)(x), stored J x n_states.
template <typename Scalar>
MatrixX<Scalar> choice_values_from_w(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& w) {
  detail::check_w(spec, w, "choice_values_from_w");
  MatrixX<Scalar> v = spec.utility;
  for (Index j = 0; j < spec.n_choices; ++j)
    v.row(j).noalias() += (spec.beta * (spec.transitions[j] * w)).transpose();
  return v;
}

/// Choice-specific values v_j(x) = u(j, x) + beta EV_j(x), stored J x n_states.
template <typename Scalar>
MatrixX<Scalar> choice_values_from_ev(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& ev) {
  detail::check_ev(spec, ev, "choice_values_from_ev");
  MatrixX<Scalar> v = spec.utility;
  for (Index j = 0; j < spec.n_choices; ++j) v.row(j) += spec.beta * ev.block(j).transpose();
  return v;
}

/// Integrated Bellman operator: W(x) <- logsumexp_j(u(j, x) + beta (F(j) W)(x)).
template <typename Scalar>
WVector<Scalar> apply_lambda(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& w) {
  return detail::logsumexp_cols(choice_values_from_w(spec, w));
}

/// W(x) = logsumexp_j(u(j, x) + beta EV_j(x)).
template <typename Scalar>
WVector<Scalar> w_from_ev(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& ev) {
  return detail::logsumexp_cols(choice_values_from_ev(spec, ev));
}

/// Block j of the result is F(j) W.
template <typename Scalar>
EVStack<Scalar> ev_from_w(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& w) {
  detail::check_w(spec, w, "ev_from_w");
  EVStack<Scalar> ev(spec.n_choices, spec.n_states);
  for (Index j = 0; j < spec.n_choices; ++j) ev.block(j).noalias() = spec.transitions[j] * w;
  return ev;
}

/**
 * Expected Bellman operator. The inner log-sum-exp m(x) is evaluated once and
 * shared by every block: block a of the result is F(a) m.
 */
template <typename Scalar>
EVStack<Scalar> apply_gamma(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& ev) {
  detail::check_ev(spec, ev, "apply_gamma");
  return ev_from_w(spec, w_from_ev(spec, ev));
}

template <typename Scalar>
CCPMatrix<Scalar> ccp_from_w(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& w) {
  return detail::softmax_cols(choice_values_from_w(spec, w));
}

template <typename Scalar>
CCPMatrix<Scalar> ccp_from_ev(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& ev) {
  return detail::softmax_cols(choice_values_from_ev(spec, ev));
}

/// Lambda'(W) from precomputed choice probabilities: beta * sum_j diag(P(j)) F(j).
template <typename Scalar>
LambdaDerivative<Scalar> frechet_lambda_from_ccp(const ModelSpec<Scalar>& spec, const CCPMatrix<Scalar>& ccp) {
  LambdaDerivative<Scalar> d = LambdaDerivative<Scalar>::Zero(spec.n_states, spec.n_states);
  for (Index j = 0; j < spec.n_choices; ++j)
    d.noalias() += (spec.beta * ccp.row(j).transpose()).asDiagonal() * spec.transitions[j];
  return d;
}

/// Entry (x, y) is beta * sum_j P(j, x) F(j)(x, y): row x of F(j) scaled by P(j, x).
template <typename Scalar>
LambdaDerivative<Scalar> frechet_lambda(const ModelSpec<Scalar>& spec, const std::type_identity_t<WVector<Scalar>>& w) {
  return frechet_lambda_from_ccp(spec, ccp_from_w(spec, w));
}

/// Gamma'(EV) from precomputed choice probabilities; block (a, j) is beta F(a) diag(P(j)).
template <typename Scalar>
GammaDerivative<Scalar> frechet_gamma_from_ccp(const ModelSpec<Scalar>& spec, const CCPMatrix<Scalar>& ccp) {
  const Index n = spec.n_states;
  const Index J = spec.n_choices;
  GammaDerivative<Scalar> d(J * n, J * n);
  for (Index j = 0; j < J; ++j) {
    const auto scale = (spec.beta * ccp.row(j).transpose()).eval();
    for (Index a = 0; a < J; ++a)
      d.block(a * n, j * n, n, n).noalias() = spec.transitions[a] * scale.asDiagonal();
  }
  return d;
}

/**
 * Entry ((a, x), (j, y)) is beta * F(a)(x, y) * P(j, y). Block row a repeats
 * F(a) once per choice, and column y of block j is scaled by P(j, y).
 */
template <typename Scalar>
GammaDerivative<Scalar> frechet_gamma(const ModelSpec<Scalar>& spec, const EVStack<Scalar>& ev) {
  return frechet_gamma_from_ccp(spec, ccp_from_ev(spec, ev));
}

}  // namespace ddc
