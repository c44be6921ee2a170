#pragma once

// Seeded random problem instances for cross-checking solvers against the
// dense oracle.

#include "csmooth/cks.hpp"

#include <random>

namespace csmooth::problems {

struct AffineInstance {
  AffineModel model;
  MeasurementSequence meas;
  SplitState split;  ///< random v >= 0, eta, zeta
};

struct AffineSpec {
  std::size_t steps = 10;
  std::size_t max_state_dim = 4;
  std::size_t max_meas_dim = 3;
  std::size_t max_ineq = 2;  ///< per-step inequality rows drawn from [0, max_ineq]
  std::size_t max_eq = 1;    ///< per-step equality rows drawn from [0, max_eq]
  SplitParams params{};
};

/// Random affine model with mixed constraint blocks and random split variables.
AffineInstance random_affine(std::mt19937_64& rng, const AffineSpec& spec = {});

struct NonlinearInstance {
  NonlinearModel model;
  ConstraintSet cons;
  MeasurementSequence meas;
  SplitState split;
  Trajectory init;  ///< prior rollout
};

/// Mildly nonlinear model (affine plus small sin / quadratic terms) with
/// analytic Jacobians, one inequality per step and an equality every third
/// step, random split variables.
NonlinearInstance random_nonlinear(std::mt19937_64& rng, std::size_t steps = 10,
                                   std::size_t state_dim = 3, std::size_t meas_dim = 2,
                                   const SplitParams& params = {});

struct ConstrainedAffineProblem {
  NonlinearModel model;
  ConstraintSet cons;
  MeasurementSequence meas;
};

/// Affine inequality-only problem whose unconstrained optimum violates some
/// constraints; feasible set nonempty (contains the simulated truth).
ConstrainedAffineProblem random_active_inequality(std::mt19937_64& rng, std::size_t steps,
                                                  std::size_t state_dim = 2);

/// Affine problem with a mix of inequality and equality rows, at least one of
/// each, drawn like random_active_inequality.
ConstrainedAffineProblem random_mixed_constraints(std::mt19937_64& rng, std::size_t steps,
                                                  std::size_t state_dim = 2);

}  // namespace csmooth::problems
