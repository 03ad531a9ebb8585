#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddc/solvers.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace ddc;

namespace {

oracle::RandomModelOptions tiny_models() {
  oracle::RandomModelOptions o;
  o.min_states = o.max_states = 3;
  o.min_choices = o.max_choices = 2;
  o.min_beta = 0.5;
  o.max_beta = 0.95;
  return o;
}

double inf_norm(const VectorX<double>& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("vfi converges to the constant fixed point") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    auto spec = oracle::random_model(rng, {.min_states = 1, .max_states = 8, .min_choices = 1, .max_choices = 4,
                                           .min_beta = 0.3, .max_beta = 0.9});
    spec.utility.setZero();
    const double expected = std::log(double(spec.n_choices)) / (1 - spec.beta);
    const auto res = vfi(spec, Formulation::W);
    CHECK(res.converged);
    CHECK((res.w().array() - expected).abs().maxCoeff() <= 1e-12 * std::max(1.0, expected));
  }
}

TEST_CASE("vfi with beta = 0 converges in one iteration") {
  std::mt19937_64 rng(22);
  auto spec = oracle::random_model(rng);
  spec.beta = 0.0;
  for (auto f : {Formulation::W, Formulation::EV}) {
    const auto res = vfi(spec, f);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    CHECK(res.trace.size() == 1);
  }
  const auto res = vfi(spec, Formulation::W);
  for (Index x = 0; x < spec.n_states; ++x) CHECK(res.w()(x) == logsumexp(spec.utility.col(x)));
}

TEST_CASE("vfi cross-consistency against brute force on tiny models") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 5; ++t) {
    const auto spec = oracle::random_model(rng, tiny_models());
    const auto plain = oracle::from_spec(spec);
    const auto w_star = oracle::brute_force_w(plain);
    const auto rw = vfi(spec, Formulation::W);
    const auto rev = vfi(spec, Formulation::EV);
    REQUIRE(rw.converged);
    REQUIRE(rev.converged);
    CHECK(oracle::sup_dist(oracle::to_vec(rw.w()), w_star) <= 1e-9);
    const auto ev = rev.ev();
    for (Index j = 0; j < spec.n_choices; ++j)
      CHECK(inf_norm(ev.block(j) - spec.transitions[j] * rw.w()) <= 1e-9);
  }
}

TEST_CASE("vfi decays at rate beta") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 10; ++t) {
    const auto spec = oracle::random_model(rng, {.min_states = 2, .max_states = 10, .min_choices = 2, .max_choices = 4,
                                                 .min_beta = 0.6, .max_beta = 0.95});
    SolveOptions opts;
    opts.max_iters = 60;
    for (auto f : {Formulation::W, Formulation::EV}) {
      const auto res = vfi(spec, f, opts);
      for (std::size_t i = 1; i < res.trace.size(); ++i) {
        const auto& prev = res.trace.rows[i - 1];
        const auto& cur = res.trace.rows[i];
        if (prev.sup_diff < 1e-9) break;
        CHECK(cur.sup_diff <= spec.beta * prev.sup_diff + 1e-12);
        // For successive approximations the residual of x_k is the next step.
        CHECK(prev.residual == doctest::Approx(cur.sup_diff).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("vfi reports non-finite iterates with the iteration index") {
  ModelSpec<double> spec;
  spec.n_states = 1;
  spec.n_choices = 2;
  spec.beta = 0.99;
  spec.utility = Eigen::Vector2d(1e308, 1e308);
  spec.transitions.assign(2, MatrixX<double>::Ones(1, 1));
  try {
    vfi(spec, Formulation::W);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.iteration() >= 0);
  }
}

TEST_CASE("vfi and poly_solve validate inputs") {
  const auto spec = fixtures::constant_model(3, 2, 0.5, MatrixX<double>::Identity(3, 3));
  CHECK_THROWS_AS(vfi(spec, WVector<double>(WVector<double>::Zero(4))), DomainError);
  CHECK_THROWS_AS(poly_solve(spec, EVStack<double>(3, 3)), DomainError);
  SolveOptions bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(vfi(spec, Formulation::W, bad), DomainError);
  bad = {};
  bad.tol_residual = 0;
  CHECK_THROWS_AS(poly_solve(spec, Formulation::EV, bad), DomainError);
}

TEST_CASE("poly_solve on the constant model: the first Newton step is exact") {
  const auto spec = fixtures::constant_model(5, 3, 0.9, MatrixX<double>::Constant(5, 5, 0.2));
  const double expected = std::log(3.0) / 0.1;
  for (auto f : {Formulation::W, Formulation::EV}) {
    const auto res = poly_solve(spec, f);
    REQUIRE(res.converged);
    CHECK((res.solution.array() - expected).abs().maxCoeff() <= 1e-12);
    std::size_t first_newton = 0;
    while (res.trace.rows[first_newton].method != Method::Newton) ++first_newton;
    CHECK(first_newton > 0);
    // residual of the iterate produced by the first Newton step
    CHECK(res.trace.rows[first_newton].residual <= 1e-12);
    // one confirming step after it
    CHECK(res.trace.size() <= first_newton + 2);
  }
}

TEST_CASE("vfi hitting max_iters reports non-convergence") {
  const auto spec = build_bus_model<double>(fixtures::reference_bus(20));
  SolveOptions opts;
  opts.max_iters = 5;
  const auto res = vfi(spec, Formulation::W, opts);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 5);
}

TEST_CASE("newton_step_w") {
  SUBCASE("constant model: one step lands on the fixed point") {
    std::mt19937_64 rng(25);
    for (int t = 0; t < 10; ++t) {
      auto spec = oracle::random_model(rng);
      spec.utility.setZero();
      for (auto& F : spec.transitions) F = spec.transitions[0];
      const double expected = std::log(double(spec.n_choices)) / (1 - spec.beta);
      const auto start = oracle::to_eigen(oracle::random_vector(rng, spec.n_states, 50));
      const auto w1 = newton_step_w(spec, start);
      CHECK((w1.array() - expected).abs().maxCoeff() <= 1e-11 * std::max(1.0, expected));
    }
  }
  SUBCASE("fixed point is a fixed point of the step") {
    std::mt19937_64 rng(26);
    for (int t = 0; t < 10; ++t) {
      const auto spec = oracle::random_model(rng);
      const auto res = poly_solve(spec, Formulation::W);
      REQUIRE(res.converged);
      REQUIRE(res.final_residual <= 1e-13);
      CHECK(inf_norm(newton_step_w(spec, res.w()) - res.w()) <= 1e-12);
    }
  }
  SUBCASE("Newton from a 5-iteration warm start converges quadratically") {
    std::mt19937_64 rng(27);
    for (int t = 0; t < 10; ++t) {
      const auto spec = oracle::random_model(rng, tiny_models());
      const auto w_star = oracle::to_eigen(oracle::brute_force_w(oracle::from_spec(spec)));
      WVector<double> w = WVector<double>::Zero(3);
      for (int i = 0; i < 5; ++i) w = apply_lambda(spec, w);
      double e = inf_norm(w - w_star);
      int steps = 0;
      while (inf_norm(w - apply_lambda(spec, w)) >= 1e-12 && steps < 8) {
        w = newton_step_w(spec, w);
        const double e_next = inf_norm(w - w_star);
        if (e_next > 1e-12) CHECK(std::log(e_next) <= 2.0 * std::log(e) + 10.0);
        e = e_next;
        ++steps;
      }
      CHECK(steps < 8);
      CHECK(e <= 1e-10);
    }
  }
}

TEST_CASE("formulations give the same choice probabilities") {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 20; ++t) {
    const auto spec = oracle::random_model(rng);
    const auto rw = poly_solve(spec, Formulation::W);
    const auto rev = poly_solve(spec, Formulation::EV);
    REQUIRE(rw.converged);
    REQUIRE(rev.converged);
    CHECK((rw.ccp - rev.ccp).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(rw.final_residual <= 1e-12);
    CHECK(fixtures::newton_tail_superlinear(rw.trace));
    CHECK(fixtures::newton_tail_superlinear(rev.trace));
  }
}

TEST_CASE("traces are deterministic and serialize to CSV") {
  const auto spec = build_bus_model<double>(fixtures::reference_bus(40));
  const auto a = poly_solve(spec, Formulation::EV);
  const auto b = poly_solve(spec, Formulation::EV);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace.rows[i].k == static_cast<long>(i + 1));
    CHECK(a.trace.rows[i].method == b.trace.rows[i].method);
    CHECK(a.trace.rows[i].sup_diff == b.trace.rows[i].sup_diff);
    CHECK(a.trace.rows[i].residual == b.trace.rows[i].residual);
    CHECK(a.trace.rows[i].step_time_s >= 0.0);
  }
  CHECK(a.solution == b.solution);

  std::ostringstream os;
  write_trace_csv(os, a.trace);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,method,sup_diff,residual,step_time_s");
  std::getline(in, line);
  CHECK(line.rfind("1,VFI,", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows + 1 == a.trace.size());

  SolveOptions quiet;
  quiet.record_trace = false;
  const auto c = poly_solve(spec, Formulation::EV, quiet);
  CHECK(c.trace.empty());
  CHECK(c.converged);
  CHECK(c.solution == a.solution);
}
