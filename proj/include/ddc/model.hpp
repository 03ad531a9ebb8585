#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddc {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Integrated value function W(x), one entry per observed state.
template <typename Scalar>
using WVector = VectorX<Scalar>;

/// Conditional choice probabilities P(a, x), stored choices x states.
template <typename Scalar>
using CCPMatrix = MatrixX<Scalar>;

/// Raised when a dimension or model precondition is violated.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterate stops being finite or a linear system is singular.
class NumericError : public std::runtime_error {
 public:
  /// iteration < 0 means the failure is not tied to a solver iteration.
  NumericError(const std::string& reason, long iteration)
      : std::runtime_error(iteration < 0 ? reason
                                         : reason + " (iteration " + std::to_string(iteration) + ")"),
        reason_(reason), iteration_(iteration) {}

  const std::string& reason() const noexcept { return reason_; }
  long iteration() const noexcept { return iteration_; }

 private:
  std::string reason_;
  long iteration_;
};

/**
 * Primitives of a stationary discrete choice model with additive type I
 * extreme value shocks.
 *
 * utility is n_choices x n_states with entry (j, x) = u(j, x). transitions[j]
 * is the row-stochastic matrix F(j) with entry (x, y) = Pr(x' = y | x, j).
 */
template <typename Scalar = double>
struct ModelSpec {
  Index n_states = 0;
  Index n_choices = 0;
  Scalar beta = Scalar(0);
  MatrixX<Scalar> utility;
  std::vector<MatrixX<Scalar>> transitions;
};

/// Expected value functions EV_j(x), stored flat with index j * n_states + x.
template <typename Scalar = double>
class EVStack {
 public:
  EVStack() = default;

  EVStack(Index n_choices, Index n_states)
      : n_choices_(n_choices), n_states_(n_states),
        values_(VectorX<Scalar>::Zero(n_choices * n_states)) {}

  EVStack(Index n_choices, Index n_states, VectorX<Scalar> flat)
      : n_choices_(n_choices), n_states_(n_states), values_(std::move(flat)) {
    if (values_.size() != n_choices_ * n_states_)
      throw DomainError("EVStack: flat vector has length " + std::to_string(values_.size()) +
                        ", expected " + std::to_string(n_choices_ * n_states_));
  }

  static EVStack Constant(Index n_choices, Index n_states, Scalar value) {
    return EVStack(n_choices, n_states, VectorX<Scalar>::Constant(n_choices * n_states, value));
  }

  Index n_choices() const { return n_choices_; }
  Index n_states() const { return n_states_; }

  auto block(Index j) { return values_.segment(j * n_states_, n_states_); }
  auto block(Index j) const { return values_.segment(j * n_states_, n_states_); }

  VectorX<Scalar>& flat() { return values_; }
  const VectorX<Scalar>& flat() const { return values_; }

 private:
  Index n_choices_ = 0;
  Index n_states_ = 0;
  VectorX<Scalar> values_;
};

/// Result of validate_model. Violations are data; an empty list means ok.
struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

template <typename Scalar>
ValidationReport validate_model(const ModelSpec<Scalar>& spec) {
  ValidationReport report;
  auto add = [&report](const std::string& msg) { report.violations.push_back(msg); };

  if (spec.n_states < 1) add("n_states must be positive");
  if (spec.n_choices < 1) add("n_choices must be positive");
  if (!(spec.beta >= Scalar(0) && spec.beta < Scalar(1))) add("beta not in [0,1)");

  if (spec.utility.rows() != spec.n_choices || spec.utility.cols() != spec.n_states) {
    std::ostringstream os;
    os << "utility is " << spec.utility.rows() << "x" << spec.utility.cols() << ", expected "
       << spec.n_choices << "x" << spec.n_states;
    add(os.str());
  } else {
    for (Index j = 0; j < spec.utility.rows(); ++j)
      for (Index x = 0; x < spec.utility.cols(); ++x)
        if (!std::isfinite(spec.utility(j, x)))
          add("utility(" + std::to_string(j) + "," + std::to_string(x) + ") is not finite");
  }

  if (static_cast<Index>(spec.transitions.size()) != spec.n_choices) {
    add("transitions has " + std::to_string(spec.transitions.size()) + " matrices, expected " +
        std::to_string(spec.n_choices));
  }
  // Choice labels in messages are 1-based, matching the F(1), ..., F(J) convention.
  for (std::size_t j = 0; j < spec.transitions.size(); ++j) {
    const auto& F = spec.transitions[j];
    const std::string name = "F(" + std::to_string(j + 1) + ")";
    if (F.rows() != spec.n_states || F.cols() != spec.n_states) {
      std::ostringstream os;
      os << name << " is " << F.rows() << "x" << F.cols() << ", expected " << spec.n_states << "x"
         << spec.n_states;
      add(os.str());
      continue;
    }
    for (Index x = 0; x < F.rows(); ++x) {
      bool entries_ok = true;
      for (Index y = 0; y < F.cols(); ++y) {
        const Scalar p = F(x, y);
        if (!(p >= Scalar(0) && p <= Scalar(1) + Scalar(1e-12))) {
          add(name + "(" + std::to_string(x) + "," + std::to_string(y) + ") not in [0,1]");
          entries_ok = false;
        }
      }
      const Scalar sum = F.row(x).sum();
      if (entries_ok && std::abs(sum - Scalar(1)) > Scalar(1e-12)) {
        std::ostringstream os;
        os << "row " << x << " of " << name << " sums to " << sum;
        add(os.str());
      }
    }
  }
  return report;
}

/// Throws DomainError listing every violation when the model is invalid.
template <typename Scalar>
void require_valid(const ModelSpec<Scalar>& spec) {
  const auto report = validate_model(spec);
  if (report.ok()) return;
  std::string msg = "invalid model:";
  for (const auto& v : report.violations) msg += "\n  " + v;
  throw DomainError(msg);
}

/// log(sum(exp(v))) with the maximum shifted out before exponentiating.
template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) throw DomainError("logsumexp of an empty vector");
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) throw DomainError("logsumexp of a non-finite vector");
  return m + std::log((v.derived().array() - m).exp().sum());
}

}  // namespace ddc
