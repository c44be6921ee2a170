#pragma once

// Ship-tracking benchmark: a 4-state constant-velocity target
// (vx, px, vy, py) observed through ranges to beacons at (0, 0) and (2 pi, 0),
// constrained to stay above py = 1.25 - sin(px).

#include "csmooth/oracle.hpp"
#include "csmooth/splitting.hpp"

#include <cstdint>
#include <string>

namespace csmooth::ship {

struct ShipExperimentConfig {
  std::size_t steps = 100;
  double tau = 0.25;  ///< range noise standard deviation
  Method method = Method::Admm;
  SplitParams params{};
  std::size_t max_outer = 100;
  InnerOptions inner{};
  std::uint64_t seed = 1;
  /// Prior covariance is prior_var * I, centred on the true first state.
  double prior_var = 1.0;

  /// 2 pi / steps.
  double dt() const noexcept;
  /// Time of 0-based step k: (k + 1) * dt, so the last step lands on 2 pi.
  double time(std::size_t k) const noexcept;

  void validate() const;
  SolveOptions solve_options() const;
};

/// x(t) = (1, t, -cos t, 1.3 - sin t) on the step grid.
Trajectory ship_truth(const ShipExperimentConfig& cfg);

struct ShipProblem {
  NonlinearModel model;
  ConstraintSet cons;
};

/// Model with analytic Jacobians and the scalar inequality
/// c(x) = 1.25 - sin(x2) - x4 <= 0 at every step.
ShipProblem ship_model(const ShipExperimentConfig& cfg);

/// y_t = h(truth_t) + r_t, r_t ~ N(0, tau^2 I), from a generator seeded by cfg.seed.
MeasurementSequence simulate(const ShipExperimentConfig& cfg);

struct ExperimentResult {
  Trajectory estimate;
  Trajectory unconstrained;
  Trajectory truth;
  Vector rmse;                  ///< per state component
  Vector unconstrained_rmse;
  double position_rmse = 0.0;   ///< sqrt(mean_t (dpx^2 + dpy^2))
  double unconstrained_position_rmse = 0.0;
  ConvergenceTrace trace;
  double wall_seconds = 0.0;
  std::size_t inner_iterations = 0;
  bool converged = false;
  std::string status = "ok";    ///< "ok" or a failure description
};

/// Per-component RMSE between two trajectories of equal shape.
Vector rmse(const Trajectory& estimate, const Trajectory& truth);
/// RMSE of the planar position (components 2 and 4).
double position_rmse(const Trajectory& estimate, const Trajectory& truth);

/// Solves the experiment on `meas` (simulated from cfg when empty).
ExperimentResult run_experiment(const ShipExperimentConfig& cfg,
                                const MeasurementSequence* meas = nullptr);

struct ScalingRow {
  std::size_t steps = 0;
  std::string solver;            ///< e.g. "cieks-admm" or "batch-admm"
  double mean_seconds = 0.0;
  std::size_t repeats = 0;
  double mean_outer_iterations = 0.0;
  std::string status = "ok";     ///< "ok", "size_limit" or an error description
};

struct ScalingOptions {
  std::vector<std::size_t> steps{1000, 10000};
  std::size_t repeats = 3;
  bool include_batch = false;
  oracle::BatchOptions batch{};
};

/// Mean wall time of the smoother-based solver (and optionally the dense
/// batch solver) for each T. Batch runs past the memory limit are reported
/// with status "size_limit".
std::vector<ScalingRow> run_scaling(const ShipExperimentConfig& cfg, const ScalingOptions& opts);

}  // namespace csmooth::ship
