#pragma once

// Test-only reference implementations. Everything here works on plain nested
// std::vectors with scalar loops so it shares no code path with the library.

#include "ddc/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

struct PlainModel {
  int n = 0;  // states
  int J = 0;  // choices
  double beta = 0.0;
  Mat u;               // u[j][x]
  std::vector<Mat> F;  // F[j][x][y]
};

inline PlainModel from_spec(const ddc::ModelSpec<double>& spec) {
  PlainModel m;
  m.n = static_cast<int>(spec.n_states);
  m.J = static_cast<int>(spec.n_choices);
  m.beta = spec.beta;
  m.u.assign(m.J, Vec(m.n));
  m.F.assign(m.J, Mat(m.n, Vec(m.n)));
  for (int j = 0; j < m.J; ++j)
    for (int x = 0; x < m.n; ++x) {
      m.u[j][x] = spec.utility(j, x);
      for (int y = 0; y < m.n; ++y) m.F[j][x][y] = spec.transitions[j](x, y);
    }
  return m;
}

inline double lse(const Vec& v) {
  double m = v[0];
  for (double a : v) m = std::max(m, a);
  double s = 0.0;
  for (double a : v) s += std::exp(a - m);
  return m + std::log(s);
}

inline double expect(const Mat& F, int x, const Vec& w) {
  double s = 0.0;
  for (std::size_t y = 0; y < w.size(); ++y) s += F[x][y] * w[y];
  return s;
}

inline Vec lambda(const PlainModel& m, const Vec& w) {
  Vec out(m.n);
  for (int x = 0; x < m.n; ++x) {
    Vec v(m.J);
    for (int j = 0; j < m.J; ++j) v[j] = m.u[j][x] + m.beta * expect(m.F[j], x, w);
    out[x] = lse(v);
  }
  return out;
}

// ev is flat, index j * n + x.
inline Vec gamma(const PlainModel& m, const Vec& ev) {
  Vec inner(m.n);
  for (int x = 0; x < m.n; ++x) {
    Vec v(m.J);
    for (int j = 0; j < m.J; ++j) v[j] = m.u[j][x] + m.beta * ev[j * m.n + x];
    inner[x] = lse(v);
  }
  Vec out(m.J * m.n);
  for (int a = 0; a < m.J; ++a)
    for (int x = 0; x < m.n; ++x) out[a * m.n + x] = expect(m.F[a], x, inner);
  return out;
}

// P[j][x] from choice-specific values v[j][x].
inline Mat softmax(const Mat& v) {
  const int J = static_cast<int>(v.size());
  const int n = static_cast<int>(v[0].size());
  Mat p(J, Vec(n));
  for (int x = 0; x < n; ++x) {
    Vec col(J);
    for (int j = 0; j < J; ++j) col[j] = v[j][x];
    const double l = lse(col);
    for (int j = 0; j < J; ++j) p[j][x] = std::exp(col[j] - l);
  }
  return p;
}

inline Mat ccp_w(const PlainModel& m, const Vec& w) {
  Mat v(m.J, Vec(m.n));
  for (int j = 0; j < m.J; ++j)
    for (int x = 0; x < m.n; ++x) v[j][x] = m.u[j][x] + m.beta * expect(m.F[j], x, w);
  return softmax(v);
}

inline double sup_dist(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Brute-force successive approximations on W, fixed iteration count.
inline Vec brute_force_w(const PlainModel& m, long iterations = 100000) {
  Vec w(m.n, 0.0);
  for (long k = 0; k < iterations; ++k) w = lambda(m, w);
  return w;
}

inline Vec brute_force_ev(const PlainModel& m, long iterations = 100000) {
  Vec ev(m.J * m.n, 0.0);
  for (long k = 0; k < iterations; ++k) ev = gamma(m, ev);
  return ev;
}

/// Central finite-difference Jacobian of `op` at x; column y is d op / d x_y.
template <typename Op>
Mat fd_jacobian(Op&& op, const Vec& x, double h = 1e-6) {
  const std::size_t n = x.size();
  Mat jac;
  Vec probe = x;
  for (std::size_t y = 0; y < n; ++y) {
    probe[y] = x[y] + h;
    const Vec up = op(probe);
    probe[y] = x[y] - h;
    const Vec down = op(probe);
    probe[y] = x[y];
    if (jac.empty()) jac.assign(up.size(), Vec(n));
    for (std::size_t r = 0; r < up.size(); ++r) jac[r][y] = (up[r] - down[r]) / (2 * h);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Random models for property tests
// ---------------------------------------------------------------------------

struct RandomModelOptions {
  int min_states = 1;
  int max_states = 10;
  int min_choices = 1;
  int max_choices = 4;
  double min_beta = 0.5;
  double max_beta = 0.99;
  double utility_scale = 2.0;
  double sparsity = 0.3;  // chance that an off-band transition entry is zero
};

inline ddc::ModelSpec<double> random_model(std::mt19937_64& rng, const RandomModelOptions& o = {}) {
  std::uniform_int_distribution<int> states(o.min_states, o.max_states);
  std::uniform_int_distribution<int> choices(o.min_choices, o.max_choices);
  std::uniform_real_distribution<double> beta(o.min_beta, o.max_beta);
  std::uniform_real_distribution<double> util(-o.utility_scale, o.utility_scale);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ddc::ModelSpec<double> spec;
  spec.n_states = states(rng);
  spec.n_choices = choices(rng);
  spec.beta = beta(rng);
  spec.utility.resize(spec.n_choices, spec.n_states);
  for (ddc::Index j = 0; j < spec.n_choices; ++j)
    for (ddc::Index x = 0; x < spec.n_states; ++x) spec.utility(j, x) = util(rng);
  for (ddc::Index j = 0; j < spec.n_choices; ++j) {
    ddc::MatrixX<double> F(spec.n_states, spec.n_states);
    for (ddc::Index x = 0; x < spec.n_states; ++x) {
      double sum = 0.0;
      for (ddc::Index y = 0; y < spec.n_states; ++y) {
        const bool keep = y == x || unit(rng) > o.sparsity;
        F(x, y) = keep ? unit(rng) + 1e-3 : 0.0;
        sum += F(x, y);
      }
      F.row(x) /= sum;
    }
    spec.transitions.push_back(std::move(F));
  }
  return spec;
}

inline Vec random_vector(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Vec v(n);
  for (double& a : v) a = d(rng);
  return v;
}

inline ddc::VectorX<double> to_eigen(const Vec& v) {
  ddc::VectorX<double> e(static_cast<ddc::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) e(static_cast<ddc::Index>(i)) = v[i];
  return e;
}

inline Vec to_vec(const ddc::VectorX<double>& e) { return Vec(e.data(), e.data() + e.size()); }

}  // namespace oracle
