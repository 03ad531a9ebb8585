#include "ddc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <limits>

namespace ddc {
namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double min_time(int reps, F&& body) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    body();
    const auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

// Keeps results observable so the timed work is not optimized away.
volatile double g_sink = 0.0;

BenchRow bench_cell(ModelFamily family, Index n_states, const BenchOptions& opts) {
  const auto spec = build_family_model(family, n_states, opts);

  WVector<double> w = WVector<double>::Zero(spec.n_states);
  for (int i = 0; i < opts.warm_start_vfi; ++i) w = apply_lambda(spec, w);
  const EVStack<double> ev = ev_from_w(spec, w);

  // Precomputed inputs for the step-only timings.
  const WVector<double> Tw = apply_lambda(spec, w);
  const auto dw = frechet_lambda(spec, w);
  const EVStack<double> Tev = apply_gamma(spec, ev);
  const auto dev = frechet_gamma(spec, ev);

  BenchRow row;
  row.model = family;
  row.n_states = spec.n_states;
  row.n_choices = spec.n_choices;
  row.reps = opts.reps;

  row.time_step_w = min_time(opts.reps, [&] {
    const auto next = newton_update<double>(w, Tw, dw);
    g_sink = next(0);
  });
  row.time_step_ev = min_time(opts.reps, [&] {
    const auto next = newton_update<double>(ev.flat(), Tev.flat(), dev);
    g_sink = next(0);
  });
  row.time_total_w = min_time(opts.reps, [&] {
    const WVector<double> value = apply_lambda(spec, w);
    const auto ccp = ccp_from_w(spec, w);
    const auto d = frechet_lambda_from_ccp(spec, ccp);
    const auto next = newton_update<double>(w, value, d);
    g_sink = next(0);
  });
  row.time_total_ev = min_time(opts.reps, [&] {
    const EVStack<double> value = apply_gamma(spec, ev);
    const auto ccp = ccp_from_ev(spec, ev);
    const auto d = frechet_gamma_from_ccp(spec, ccp);
    const auto next = newton_update<double>(ev.flat(), value.flat(), d);
    g_sink = next(0);
  });

  row.ratio_step = row.time_step_ev / row.time_step_w;
  row.ratio_total = row.time_total_ev / row.time_total_w;
  return row;
}

}  // namespace

ModelFamily model_family_from_string(const std::string& s) {
  if (s == "bus") return ModelFamily::bus;
  if (s == "storable") return ModelFamily::storable;
  throw DomainError("unknown model family '" + s + "'");
}

ModelSpec<double> build_family_model(ModelFamily family, Index n_states, const BenchOptions& opts) {
  if (family == ModelFamily::bus) {
    BusModelConfig cfg = opts.bus;
    cfg.n_states = n_states;
    return build_bus_model(cfg);
  }
  StorableGoodsConfig cfg = opts.storable;
  if (n_states < 1 || n_states % cfg.price_levels != 0)
    throw DomainError("storable model: n_states=" + std::to_string(n_states) +
                      " is not a multiple of price_levels=" + std::to_string(cfg.price_levels));
  cfg.inventory_levels = n_states / cfg.price_levels;
  return build_storable_goods_model(cfg);
}

BenchReport bench_newton(ModelFamily family, const std::vector<Index>& sizes,
                         const BenchOptions& opts) {
  if (opts.reps < 3) throw DomainError("bench_newton: reps must be at least 3");
  if (sizes.empty()) throw DomainError("bench_newton: no sizes given");
  // Validate every size before any timing starts.
  for (Index n : sizes) build_family_model(family, n, opts);

  BenchReport report;
  if (opts.parallel) {
    std::vector<std::future<BenchRow>> cells;
    for (Index n : sizes)
      cells.push_back(std::async(std::launch::async, bench_cell, family, n, std::cref(opts)));
    for (auto& c : cells) report.rows.push_back(c.get());
  } else {
    for (Index n : sizes) report.rows.push_back(bench_cell(family, n, opts));
  }
  return report;
}

void write_bench_csv(std::ostream& os, const BenchReport& report) {
  os << "model,n_states,n_choices,reps,time_step_ev_s,time_step_w_s,time_total_ev_s,"
        "time_total_w_s,ratio_step,ratio_total\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%ld,%ld,%d,%.9g,%.9g,%.9g,%.9g,%.6g,%.6g\n",
                  to_string(r.model), static_cast<long>(r.n_states),
                  static_cast<long>(r.n_choices), r.reps, r.time_step_ev, r.time_step_w,
                  r.time_total_ev, r.time_total_w, r.ratio_step, r.ratio_total);
    os << buf;
  }
}

SolveResult<double> trace_convergence(const ModelSpec<double>& spec, Formulation formulation,
                                      SolveOptions opts, std::ostream& csv) {
  opts.record_trace = true;
  auto result = poly_solve(spec, formulation, opts);
  write_trace_csv(csv, result.trace);
  return result;
}

}  // namespace ddc
