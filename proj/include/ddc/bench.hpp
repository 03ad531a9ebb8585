#pragma once

#include "ddc/models.hpp"
#include "ddc/solvers.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace ddc {

enum class ModelFamily { bus, storable };

inline const char* to_string(ModelFamily f) { return f == ModelFamily::bus ? "bus" : "storable"; }

ModelFamily model_family_from_string(const std::string& s);

struct BenchRow {
  ModelFamily model = ModelFamily::bus;
  Index n_states = 0;
  Index n_choices = 0;
  int reps = 0;
  double time_step_ev = 0.0;
  double time_step_w = 0.0;
  double time_total_ev = 0.0;
  double time_total_w = 0.0;
  double ratio_step = 0.0;   // time_step_ev / time_step_w
  double ratio_total = 0.0;  // time_total_ev / time_total_w
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

struct BenchOptions {
  int reps = 5;
  int warm_start_vfi = 5;  // VFI iterations on W before timing; EV starts at ev_from_w of it
  bool parallel = false;   // run (model, size) cells concurrently; never inside a timed region
  BusModelConfig bus;      // n_states is overridden per size
  StorableGoodsConfig storable;  // inventory_levels is overridden per size
};

/// Model of the given family with n_states states, other parameters from opts.
ModelSpec<double> build_family_model(ModelFamily family, Index n_states, const BenchOptions& opts);

/**
 * Times one Newton step in each formulation at every size.
 *
 * "step" is the update x - (I - T')^{-1} (x - T(x)) given the derivative and
 * operator value. "total" is everything in one Newton iteration: operator
 * evaluation, choice probabilities, derivative assembly and the step. Each
 * timing is the minimum over opts.reps runs.
 */
BenchReport bench_newton(ModelFamily family, const std::vector<Index>& sizes,
                         const BenchOptions& opts = {});

/// CSV with header model,n_states,n_choices,reps,time_step_ev_s,...,ratio_total.
void write_bench_csv(std::ostream& os, const BenchReport& report);

/// Runs the polyalgorithm with tracing on and writes the trace as CSV.
SolveResult<double> trace_convergence(const ModelSpec<double>& spec, Formulation formulation,
                                      SolveOptions opts, std::ostream& csv);

}  // namespace ddc
