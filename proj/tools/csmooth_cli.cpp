// csmooth: ship-tracking experiment, solver runs, scaling study and oracle
// cross-checks from the command line.
//
//   csmooth simulate --T 100 --seed 1 --out run/
//   csmooth solve    --input run/ --method admm --out run/
//   csmooth scaling  --Ts 1000,10000 --repeats 3 --batch --out scaling/
//   csmooth verify   --instances 20

#include "csmooth/io.hpp"
#include "csmooth/oracle.hpp"
#include "csmooth/problems.hpp"
#include "csmooth/ship.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace csmooth;

namespace {

struct CommonFlags {
  std::size_t steps = 100;
  double tau = 0.25;
  std::string method = "admm";
  double rho1 = 1.0;
  double rho2 = 1.0;
  std::optional<double> alpha;
  std::size_t sbm_inner = 1;
  std::size_t max_outer = 100;
  std::size_t max_inner = 10;
  std::uint64_t seed = 1;
  std::string out = ".";
  bool deterministic = false;
  bool prs_half_step = false;
};

void add_problem_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--T", f.steps, "number of time steps")->check(CLI::PositiveNumber);
  app->add_option("--tau", f.tau, "range noise standard deviation")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "noise generator seed");
}

void add_solver_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--method", f.method, "splitting method")
      ->check(CLI::IsMember({"admm", "prs", "sbm"}));
  app->add_option("--rho1", f.rho1, "inequality penalty")->check(CLI::PositiveNumber);
  app->add_option("--rho2", f.rho2, "equality penalty")->check(CLI::PositiveNumber);
  app->add_option("--alpha", f.alpha, "PRS relaxation for both multipliers, in (0, 1)");
  app->add_option("--M", f.sbm_inner, "split Bregman inner sweeps")->check(CLI::PositiveNumber);
  app->add_option("--max-outer", f.max_outer, "outer iteration cap");
  app->add_option("--max-inner", f.max_inner, "Gauss-Newton iteration cap per x-update")
      ->check(CLI::PositiveNumber);
  app->add_flag("--prs-half-step-aux", f.prs_half_step,
                "PRS: use the half-step multiplier in the auxiliary update");
}

ship::ShipExperimentConfig make_config(const CommonFlags& f) {
  ship::ShipExperimentConfig cfg;
  cfg.steps = f.steps;
  cfg.tau = f.tau;
  cfg.method = parse_method(f.method);
  cfg.params.rho1 = f.rho1;
  cfg.params.rho2 = f.rho2;
  if (f.alpha) cfg.params.alpha1 = cfg.params.alpha2 = *f.alpha;
  cfg.params.sbm_inner = f.sbm_inner;
  cfg.params.prs_half_step_aux = f.prs_half_step;
  cfg.max_outer = f.max_outer;
  cfg.inner.max_inner = f.max_inner;
  cfg.seed = f.seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return is;
}

void write_config(const fs::path& dir, const ship::ShipExperimentConfig& cfg) {
  auto os = open_out(dir / "config.txt");
  io::write_key_values(os, io::to_key_values(cfg));
}

int run_simulate(const CommonFlags& f) {
  const auto cfg = make_config(f);
  const fs::path dir(f.out);
  fs::create_directories(dir);
  const auto grid = io::time_grid(cfg);
  {
    auto os = open_out(dir / "truth.csv");
    io::write_series_csv(os, ship::ship_truth(cfg).matrix(), grid, "x");
  }
  {
    auto os = open_out(dir / "measurements.csv");
    io::write_series_csv(os, ship::simulate(cfg).matrix(), grid, "y");
  }
  write_config(dir, cfg);
  std::cout << "wrote " << (dir / "truth.csv").string() << ", "
            << (dir / "measurements.csv").string() << ", " << (dir / "config.txt").string()
            << '\n';
  return 0;
}

int run_solve(CommonFlags f, const std::string& input, const CLI::App& app) {
  const fs::path in(input);
  const fs::path meas_path = fs::is_directory(in) ? in / "measurements.csv" : in;
  const fs::path cfg_path = meas_path.parent_path() / "config.txt";

  // Problem settings come from the simulation's config when present;
  // explicit flags take precedence.
  if (fs::exists(cfg_path)) {
    auto is = open_in(cfg_path);
    const auto saved = io::config_from_key_values(io::read_key_values(is));
    if (app.count("--T") == 0) f.steps = saved.steps;
    if (app.count("--tau") == 0) f.tau = saved.tau;
    if (app.count("--seed") == 0) f.seed = saved.seed;
  }

  auto is = open_in(meas_path);
  const auto table = io::read_series_csv(is);
  if (table.values.rows() != 2) throw ContractError("solve: expected two range columns (y1, y2)");
  if (app.count("--T") == 0) f.steps = static_cast<std::size_t>(table.values.cols());
  const auto cfg = make_config(f);
  if (static_cast<std::size_t>(table.values.cols()) != cfg.steps) {
    throw ContractError("solve: measurement file has " + std::to_string(table.values.cols()) +
                        " steps but T = " + std::to_string(cfg.steps));
  }
  const MeasurementSequence meas(table.values);
  const auto res = ship::run_experiment(cfg, &meas);

  const fs::path dir(f.out);
  fs::create_directories(dir);
  const auto grid = io::time_grid(cfg);
  {
    auto os = open_out(dir / "trace.csv");
    io::write_trace_csv(os, res.trace, !f.deterministic);
  }
  if (res.status == "ok") {
    auto os = open_out(dir / "estimate.csv");
    io::write_series_csv(os, res.estimate.matrix(), grid, "x");
    auto os2 = open_out(dir / "unconstrained.csv");
    io::write_series_csv(os2, res.unconstrained.matrix(), grid, "x");
  }
  write_config(dir, cfg);

  nlohmann::ordered_json j;
  j["status"] = res.status;
  j["method"] = f.method;
  j["T"] = cfg.steps;
  j["outer_iterations"] = res.trace.size();
  j["inner_iterations"] = res.inner_iterations;
  j["converged"] = res.converged;
  if (res.status == "ok") {
    j["rmse"] = std::vector<double>(res.rmse.data(), res.rmse.data() + res.rmse.size());
    j["unconstrained_rmse"] = std::vector<double>(res.unconstrained_rmse.data(),
                                                  res.unconstrained_rmse.data() + res.unconstrained_rmse.size());
    j["position_rmse"] = res.position_rmse;
    j["unconstrained_position_rmse"] = res.unconstrained_position_rmse;
  }
  if (!res.trace.empty()) {
    j["final_theta"] = res.trace.theta.back();
    j["final_max_ineq"] = res.trace.max_ineq.back();
  }
  j["wall_seconds"] = f.deterministic ? 0.0 : res.wall_seconds;
  {
    auto os = open_out(dir / "metrics.json");
    os << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  if (res.status != "ok") {
    std::cerr << "csmooth: solve failed: " << res.status << '\n';
    return 2;
  }
  return 0;
}

int run_scaling_cmd(const CommonFlags& f, const std::vector<std::size_t>& steps,
                    std::size_t repeats, bool batch, double max_dense_mb) {
  auto cfg = make_config(f);
  ship::ScalingOptions opts;
  opts.steps = steps;
  opts.repeats = repeats;
  opts.include_batch = batch;
  opts.batch.max_dense_bytes = static_cast<std::size_t>(max_dense_mb * 1024.0 * 1024.0);
  const auto rows = ship::run_scaling(cfg, opts);
  const fs::path dir(f.out);
  fs::create_directories(dir);
  auto os = open_out(dir / "scaling.csv");
  io::write_scaling_csv(os, rows);
  io::write_scaling_csv(std::cout, rows);
  for (const auto& r : rows) {
    if (r.status != "ok" && r.status != "size_limit") return 2;
  }
  return 0;
}

// Cross-checks of the smoother path against the dense oracle on random
// instances; prints one line per check.
int run_verify(std::size_t instances, std::uint64_t seed) {
  bool all = true;
  const auto report = [&all](const char* name, bool ok, double worst) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "  (worst " << worst << ")\n";
    all = all && ok;
  };

  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = problems::random_affine(rng);
    worst = std::max(worst, cks_solve(inst.model, inst.split, inst.meas)
                                .max_abs_diff(oracle::batch_qp_solve(inst.model, inst.split, inst.meas)));
  }
  report("cks_solve vs dense QP", worst <= 1e-8, worst);

  worst = 0.0;
  bool same_length = true;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = problems::random_nonlinear(rng);
    InnerOptions opts;
    opts.record_iterates = true;
    const auto a = cieks_solve(inst.model, inst.cons, inst.split, inst.init, inst.meas, opts);
    const auto b = oracle::batch_gauss_newton(inst.model, inst.cons, inst.split, inst.init, inst.meas, opts);
    same_length = same_length && a.iterates.size() == b.iterates.size();
    for (std::size_t k = 0; k < std::min(a.iterates.size(), b.iterates.size()); ++k)
      worst = std::max(worst, a.iterates[k].max_abs_diff(b.iterates[k]));
  }
  report("cieks_solve vs dense Gauss-Newton", same_length && worst <= 1e-8, worst);

  for (Method m : {Method::Admm, Method::Prs, Method::Sbm}) {
    worst = 0.0;
    for (std::size_t i = 0; i < std::max<std::size_t>(1, instances / 4); ++i) {
      const auto p = problems::random_mixed_constraints(rng, 3);
      SolveOptions o;
      o.method = m;
      o.max_outer = 20;
      o.tol_step = o.tol_violation = 0.0;
      const auto a = solve(p.model, p.cons, p.meas, o);
      const auto b = oracle::batch_split_solve(p.model, p.cons, p.meas, o);
      worst = std::max(worst, a.x.max_abs_diff(b.x));
    }
    const std::string name = "splitting loop vs dense batch (" + std::string(to_string(m)) + ")";
    report(name.c_str(), worst <= 1e-10, worst);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained MAP state estimation with Kalman-smoother splitting methods"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* sim = app.add_subcommand("simulate", "write ship truth, measurements and config");
  add_problem_flags(sim, flags);
  sim->add_option("--out", flags.out, "output directory");

  std::string input;
  auto* solve_cmd = app.add_subcommand("solve", "run one splitting method on a measurement CSV");
  add_problem_flags(solve_cmd, flags);
  add_solver_flags(solve_cmd, flags);
  solve_cmd->add_option("--input", input, "measurements.csv or the directory holding it")->required();
  solve_cmd->add_option("--out", flags.out, "output directory");
  solve_cmd->add_flag("--deterministic", flags.deterministic,
                      "write zero wall times so repeated runs are byte-identical");

  std::vector<std::size_t> steps{1000, 10000};
  std::size_t repeats = 3;
  bool batch = false;
  double max_dense_mb = 1024.0;
  auto* scal = app.add_subcommand("scaling", "mean wall time per T for the smoother and dense solvers");
  add_problem_flags(scal, flags);
  add_solver_flags(scal, flags);
  scal->add_option("--Ts", steps, "ascending list of T values")->delimiter(',');
  scal->add_option("--repeats", repeats, "runs per T")->check(CLI::PositiveNumber);
  scal->add_flag("--batch", batch, "also time the dense batch solver");
  scal->add_option("--max-dense-mb", max_dense_mb, "dense solver memory limit (MiB)");
  scal->add_option("--out", flags.out, "output directory");

  std::size_t instances = 20;
  std::uint64_t verify_seed = 1;
  auto* ver = app.add_subcommand("verify", "cross-check smoother solvers against the dense oracle");
  ver->add_option("--instances", instances, "random instances per check")->check(CLI::PositiveNumber);
  ver->add_option("--seed", verify_seed, "instance generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(flags);
    if (*solve_cmd) return run_solve(flags, input, *solve_cmd);
    if (*scal) return run_scaling_cmd(flags, steps, repeats, batch, max_dense_mb);
    if (*ver) return run_verify(instances, verify_seed);
  } catch (const std::exception& e) {
    std::cerr << "csmooth: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
