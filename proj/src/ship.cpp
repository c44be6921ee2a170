#include "csmooth/ship.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace csmooth::ship {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vector truth_at(double t) {
  Vector x(4);
  x << 1.0, t, -std::cos(t), 1.3 - std::sin(t);
  return x;
}

Matrix process_cov(double dt) {
  Matrix q = Matrix::Zero(4, 4);
  Matrix block(2, 2);
  block << dt, dt * dt / 2.0, dt * dt / 2.0, dt * dt * dt / 3.0;
  q.topLeftCorner(2, 2) = block;
  q.bottomRightCorner(2, 2) = block;
  return q;
}

}  // namespace

double ShipExperimentConfig::dt() const noexcept {
  return kTwoPi / static_cast<double>(steps);
}

double ShipExperimentConfig::time(std::size_t k) const noexcept {
  return static_cast<double>(k + 1) * dt();
}

void ShipExperimentConfig::validate() const {
  if (steps < 2) throw ContractError("ship: T must be at least 2");
  if (!(tau > 0.0)) throw ContractError("ship: tau must be positive");
  if (!(prior_var > 0.0)) throw ContractError("ship: prior variance must be positive");
  params.validate();
  inner.validate();
}

SolveOptions ShipExperimentConfig::solve_options() const {
  SolveOptions opts;
  opts.method = method;
  opts.params = params;
  opts.max_outer = max_outer;
  opts.inner = inner;
  return opts;
}

Trajectory ship_truth(const ShipExperimentConfig& cfg) {
  cfg.validate();
  Trajectory out(cfg.steps, 4);
  for (std::size_t k = 0; k < cfg.steps; ++k) out[k] = truth_at(cfg.time(k));
  return out;
}

ShipProblem ship_model(const ShipExperimentConfig& cfg) {
  cfg.validate();
  const double dt = cfg.dt();

  Matrix a = Matrix::Identity(4, 4);
  a(1, 0) = dt;
  a(3, 2) = dt;

  NonlinearModel::Definition def;
  def.steps = cfg.steps;
  def.state_dim = 4;
  def.meas_dim = 2;
  def.transition = [dt](std::size_t, const Vector& x) -> Vector {
    Vector out(4);
    out << x(0), x(1) + x(0) * dt, x(2), x(3) + x(2) * dt;
    return out;
  };
  def.transition_jacobian = [a](std::size_t, const Vector&) -> Matrix { return a; };
  def.measurement = [](std::size_t, const Vector& x) -> Vector {
    Vector out(2);
    out << std::hypot(x(1), x(3)), std::hypot(x(1) - kTwoPi, x(3));
    return out;
  };
  def.measurement_jacobian = [](std::size_t, const Vector& x) -> Matrix {
    const double r1 = std::hypot(x(1), x(3));
    const double r2 = std::hypot(x(1) - kTwoPi, x(3));
    Matrix j = Matrix::Zero(2, 4);
    j(0, 1) = x(1) / r1;
    j(0, 3) = x(3) / r1;
    j(1, 1) = (x(1) - kTwoPi) / r2;
    j(1, 3) = x(3) / r2;
    return j;
  };
  def.process_cov = PerStep<Matrix>(process_cov(dt));
  def.meas_cov = PerStep<Matrix>(Matrix(cfg.tau * cfg.tau * Matrix::Identity(2, 2)));
  def.prior_mean = truth_at(cfg.time(0));
  def.prior_cov = cfg.prior_var * Matrix::Identity(4, 4);

  ConstraintSet::Definition cdef;
  cdef.steps = cfg.steps;
  cdef.state_dim = 4;
  cdef.ineq_dims = PerStep<std::size_t>(std::size_t{1});
  cdef.inequality = [](std::size_t, const Vector& x) -> Vector {
    return Vector::Constant(1, 1.25 - std::sin(x(1)) - x(3));
  };
  cdef.inequality_jacobian = [](std::size_t, const Vector& x) -> Matrix {
    Matrix j(1, 4);
    j << 0.0, -std::cos(x(1)), 0.0, -1.0;
    return j;
  };
  return {NonlinearModel(std::move(def)), ConstraintSet(std::move(cdef))};
}

MeasurementSequence simulate(const ShipExperimentConfig& cfg) {
  const ShipProblem problem = ship_model(cfg);
  const Trajectory truth = ship_truth(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.tau);
  MeasurementSequence out(cfg.steps, 2);
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    Vector y = problem.model.measurement(k, truth[k]);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise(rng);
    out[k] = y;
  }
  return out;
}

Vector rmse(const Trajectory& estimate, const Trajectory& truth) {
  if (estimate.steps() != truth.steps() || estimate.dim() != truth.dim() || truth.steps() == 0) {
    throw ContractError("rmse: shape mismatch");
  }
  const Matrix diff = estimate.matrix() - truth.matrix();
  return (diff.array().square().rowwise().sum() / static_cast<double>(truth.steps())).sqrt();
}

double position_rmse(const Trajectory& estimate, const Trajectory& truth) {
  const Vector per = rmse(estimate, truth);
  if (per.size() < 4) throw ContractError("position_rmse: need a 4-state trajectory");
  return std::sqrt(per(1) * per(1) + per(3) * per(3));
}

ExperimentResult run_experiment(const ShipExperimentConfig& cfg, const MeasurementSequence* meas) {
  using Clock = std::chrono::steady_clock;
  const ShipProblem problem = ship_model(cfg);
  const MeasurementSequence simulated = meas ? MeasurementSequence{} : simulate(cfg);
  const MeasurementSequence& y = meas ? *meas : simulated;

  ExperimentResult out;
  out.truth = ship_truth(cfg);
  const auto start = Clock::now();
  try {
    SolveResult r = solve(problem.model, problem.cons, y, cfg.solve_options());
    out.estimate = std::move(r.x);
    out.unconstrained = std::move(r.init);
    out.trace = std::move(r.trace);
    out.inner_iterations = r.inner_iterations;
    out.converged = r.converged;
  } catch (const SolveFailure& e) {
    out.status = e.what();
    out.trace = e.trace();
  } catch (const std::exception& e) {
    out.status = e.what();
  }
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (out.status == "ok") {
    out.rmse = rmse(out.estimate, out.truth);
    out.unconstrained_rmse = rmse(out.unconstrained, out.truth);
    out.position_rmse = position_rmse(out.estimate, out.truth);
    out.unconstrained_position_rmse = position_rmse(out.unconstrained, out.truth);
  }
  return out;
}

std::vector<ScalingRow> run_scaling(const ShipExperimentConfig& cfg, const ScalingOptions& opts) {
  using Clock = std::chrono::steady_clock;
  if (opts.repeats < 1) throw ContractError("run_scaling: repeats must be >= 1");
  for (std::size_t i = 1; i < opts.steps.size(); ++i) {
    if (opts.steps[i] <= opts.steps[i - 1]) throw ContractError("run_scaling: T list must ascend");
  }
  const std::string name(to_string(cfg.method));
  std::vector<ScalingRow> rows;
  for (const std::size_t steps : opts.steps) {
    ShipExperimentConfig run = cfg;
    run.steps = steps;
    const ShipProblem problem = ship_model(run);
    const MeasurementSequence y = simulate(run);
    const SolveOptions sopts = run.solve_options();

    ScalingRow smoother{steps, "cieks-" + name, 0.0, opts.repeats, 0.0, "ok"};
    for (std::size_t r = 0; r < opts.repeats && smoother.status == "ok"; ++r) {
      const auto start = Clock::now();
      try {
        const SolveResult res = solve(problem.model, problem.cons, y, sopts);
        smoother.mean_outer_iterations += static_cast<double>(res.trace.size());
      } catch (const std::exception& e) {
        smoother.status = e.what();
      }
      smoother.mean_seconds += std::chrono::duration<double>(Clock::now() - start).count();
    }
    smoother.mean_seconds /= static_cast<double>(opts.repeats);
    smoother.mean_outer_iterations /= static_cast<double>(opts.repeats);
    rows.push_back(smoother);

    if (!opts.include_batch) continue;
    ScalingRow batch{steps, "batch-" + name, 0.0, opts.repeats, 0.0, "ok"};
    if (oracle::dense_bytes(steps, 4) > opts.batch.max_dense_bytes) {
      batch.status = "size_limit";
      batch.repeats = 0;
      rows.push_back(batch);
      continue;
    }
    for (std::size_t r = 0; r < opts.repeats && batch.status == "ok"; ++r) {
      const auto start = Clock::now();
      try {
        const auto res = oracle::batch_split_solve(problem.model, problem.cons, y, sopts, opts.batch);
        batch.mean_outer_iterations += static_cast<double>(res.trace.size());
      } catch (const SizeLimitError&) {
        batch.status = "size_limit";
      } catch (const std::exception& e) {
        batch.status = e.what();
      }
      batch.mean_seconds += std::chrono::duration<double>(Clock::now() - start).count();
    }
    batch.mean_seconds /= static_cast<double>(opts.repeats);
    batch.mean_outer_iterations /= static_cast<double>(opts.repeats);
    rows.push_back(batch);
  }
  return rows;
}

}  // namespace csmooth::ship
