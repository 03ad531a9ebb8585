// Command-line front end: solve models, benchmark Newton steps, inspect
// constraint systems and check the bus replacement identity.

#include "ddc/bench.hpp"
#include "ddc/io.hpp"
#include "ddc/models.hpp"
#include "ddc/mpec.hpp"
#include "ddc/solvers.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

const char* kBenchFooter =
    "Timing boundaries:\n"
    "  step  = form I - T', LU-factorize it, solve against x - T(x) and update x.\n"
    "  total = one full Newton iteration: operator evaluation, choice probabilities,\n"
    "          derivative assembly and the step. Model construction and the warm\n"
    "          start are excluded. Times are minima over --reps runs on one thread.";

struct ModelArgs {
  std::string model = "bus";
  ddc::Index n_states = 0;  // 0: family default
  std::optional<double> beta;
  std::string variant = "corrected";
  std::string config;  // bus or storable config JSON
};

void add_model_options(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("--model", args.model, "bus | storable | json:PATH (ModelSpec JSON)")
      ->capture_default_str();
  cmd->add_option("--n-states", args.n_states, "Number of states for bus/storable models");
  cmd->add_option("--beta", args.beta, "Override the discount factor");
  cmd->add_option("--variant", args.variant, "Bus replacement transition: corrected | rust_original_faulty")
      ->capture_default_str();
  cmd->add_option("--config", args.config, "Bus or storable configuration JSON");
}

ddc::ModelSpec<double> load_model(const ModelArgs& args) {
  using namespace ddc;
  if (args.model.rfind("json:", 0) == 0) {
    auto spec = model_from_json(read_json_file(args.model.substr(5)));
    if (args.beta) spec.beta = *args.beta;
    require_valid(spec);
    return spec;
  }
  if (args.model == "bus") {
    BusModelConfig cfg = args.config.empty() ? BusModelConfig{}
                                             : bus_config_from_json(read_json_file(args.config));
    if (args.config.empty()) cfg.variant = bus_variant_from_string(args.variant);
    if (args.n_states > 0) cfg.n_states = args.n_states;
    if (args.beta) cfg.beta = *args.beta;
    return build_bus_model(cfg);
  }
  if (args.model == "storable") {
    StorableGoodsConfig cfg = args.config.empty()
                                  ? StorableGoodsConfig{}
                                  : storable_config_from_json(read_json_file(args.config));
    if (args.n_states > 0) {
      if (args.n_states % cfg.price_levels != 0)
        throw DomainError("--n-states must be a multiple of price_levels");
      cfg.inventory_levels = args.n_states / cfg.price_levels;
    }
    if (args.beta) cfg.beta = *args.beta;
    return build_storable_goods_model(cfg);
  }
  throw DomainError("unknown --model '" + args.model + "'");
}

std::vector<ddc::Index> parse_sizes(const std::string& text) {
  std::vector<ddc::Index> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      sizes.push_back(v);
    } catch (const std::exception&) {
      throw ddc::DomainError("bad size '" + item + "' in --sizes");
    }
  }
  if (sizes.empty()) throw ddc::DomainError("--sizes is empty");
  return sizes;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ddc;

  CLI::App app{"Dynamic discrete choice fixed-point solvers (W and EV formulations)"};
  app.require_subcommand(1);

  ModelArgs solve_model;
  std::string formulation = "w";
  std::string method = "hybrid";
  double tol = 1e-13;
  long max_iters = 1000;
  std::string trace_path, solve_out;
  auto* solve = app.add_subcommand("solve", "Solve a model and report convergence");
  add_model_options(solve, solve_model);
  solve->add_option("--formulation", formulation, "w | ev")
      ->check(CLI::IsMember({"w", "ev"}))
      ->capture_default_str();
  solve->add_option("--method", method, "vfi | newton | hybrid")
      ->check(CLI::IsMember({"vfi", "newton", "hybrid"}))
      ->capture_default_str();
  solve->add_option("--tol", tol, "Sup-norm tolerance on the iterate change (residual tolerance is 10x)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  solve->add_option("--trace", trace_path, "Write the convergence trace CSV here");
  solve->add_option("--out", solve_out, "Write the solution JSON here");

  ModelArgs bench_model;
  std::string sizes_text;
  int reps = 5;
  bool parallel = false;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time EV versus W Newton steps over model sizes");
  bench->footer(kBenchFooter);
  bench->add_option("--model", bench_model.model, "bus | storable")
      ->check(CLI::IsMember({"bus", "storable"}))
      ->capture_default_str();
  bench->add_option("--sizes", sizes_text, "Comma-separated list of state counts")->required();
  bench->add_option("--reps", reps, "Repetitions per timing (minimum is reported, >= 3)")
      ->check(CLI::Range(3, 1000000))
      ->capture_default_str();
  bench->add_option("--out", bench_out, "Benchmark CSV output")->required();
  bench->add_flag("--parallel", parallel, "Run independent sizes concurrently");

  ModelArgs mpec_model;
  std::string mpec_out;
  auto* mpec = app.add_subcommand("mpec-stats", "Constraint counts and Jacobian nonzeros for both formulations");
  add_model_options(mpec, mpec_model);
  mpec->add_option("--out", mpec_out, "Report JSON output")->required();

  std::string diag_variant = "corrected";
  Index diag_states = 90;
  std::optional<double> diag_beta;
  std::string diag_out;
  auto* diag = app.add_subcommand("diagnose-bus", "Check EV_2(x) = EV_1(0) at the solved bus model");
  diag->add_option("--variant", diag_variant, "corrected | rust_original_faulty")
      ->check(CLI::IsMember({"corrected", "rust_original_faulty"}))
      ->capture_default_str();
  diag->add_option("--n-states", diag_states, "Number of odometer bins")->capture_default_str();
  diag->add_option("--beta", diag_beta, "Override the discount factor");
  diag->add_option("--out", diag_out, "Report JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*solve) {
      const auto spec = load_model(solve_model);
      SolveOptions opts;
      opts.tol_fixed_point = tol;
      opts.tol_residual = 10.0 * tol;
      opts.max_iters = max_iters;
      if (method == "newton") opts.switch_rule = SwitchRule::fixed_count(0);
      const Formulation f = formulation == "w" ? Formulation::W : Formulation::EV;
      const auto result = method == "vfi" ? vfi(spec, f, opts) : poly_solve(spec, f, opts);
      if (!trace_path.empty()) {
        auto out = open_out(trace_path);
        write_trace_csv(out, result.trace);
      }
      if (!solve_out.empty()) write_json_file(solve_out, to_json(result));
      std::cout << "formulation=" << to_string(f) << " converged=" << (result.converged ? "true" : "false")
                << " iterations=" << result.iterations << " sup_diff=" << result.final_sup_diff
                << " residual=" << result.final_residual << '\n';
      return result.converged ? kExitOk : kExitNotConverged;
    }
    if (*bench) {
      BenchOptions opts;
      opts.reps = reps;
      opts.parallel = parallel;
      const auto report = bench_newton(model_family_from_string(bench_model.model),
                                       parse_sizes(sizes_text), opts);
      auto out = open_out(bench_out);
      write_bench_csv(out, report);
      write_bench_csv(std::cout, report);
      return kExitOk;
    }
    if (*mpec) {
      const auto spec = load_model(mpec_model);
      const auto cmp = compare_systems(spec);
      write_json_file(mpec_out, to_json(cmp));
      std::cout << to_json(cmp).dump() << '\n';
      return kExitOk;
    }
    if (*diag) {
      BusModelConfig cfg;
      cfg.variant = bus_variant_from_string(diag_variant);
      cfg.n_states = diag_states;
      if (diag_beta) cfg.beta = *diag_beta;
      const auto spec = build_bus_model(cfg);
      SolveOptions opts;
      opts.record_trace = false;
      const auto solved = poly_solve(spec, Formulation::EV, opts);
      const auto report = bus_ev2_diagnostics(spec, solved.ev());
      json j = to_json(report);
      j["converged"] = solved.converged;
      j["config"] = to_json(cfg);
      write_json_file(diag_out, j);
      std::cout << j.dump() << '\n';
      return solved.converged ? kExitOk : kExitNotConverged;
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
