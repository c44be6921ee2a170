#pragma once

// Dense batch reference solvers. Nothing here goes through the Kalman
// filter/smoother code: residuals are assembled into one dense
// (T*Nx) x (T*Nx) normal-equation system and solved by a plain dense
// factorization. Used to cross-check the smoother path and as the batch
// baseline in timing comparisons.

#include "csmooth/cks.hpp"
#include "csmooth/splitting.hpp"

namespace csmooth::oracle {

struct BatchOptions {
  /// Dense systems needing more memory than this are refused with SizeLimitError.
  std::size_t max_dense_bytes = std::size_t{1} << 30;
};

/// Normal equations H x = rhs of a quadratic objective in the stacked
/// trajectory (x_0; x_1; ...; x_{T-1}).
struct DenseSystem {
  Matrix hessian;
  Vector rhs;
};

/// Gradient of theta with respect to the stacked trajectory, length T*Nx.
Vector batch_theta_grad(const NonlinearModel& model, const Trajectory& traj,
                        const MeasurementSequence& meas);

/// Normal equations of the penalized affine x-subproblem.
DenseSystem batch_qp_system(const AffineModel& aff, const SplitState& split,
                            const MeasurementSequence& meas,
                            PenaltyScaling scaling = PenaltyScaling::Scaled,
                            const BatchOptions& opts = {});

/// Gradient of the penalized affine x-subproblem at `traj`, length T*Nx.
Vector batch_qp_gradient(const AffineModel& aff, const SplitState& split,
                         const MeasurementSequence& meas, const Trajectory& traj,
                         PenaltyScaling scaling = PenaltyScaling::Scaled);

/// Unique minimizer of the penalized affine x-subproblem by dense solve.
Trajectory batch_qp_solve(const AffineModel& aff, const SplitState& split,
                          const MeasurementSequence& meas,
                          PenaltyScaling scaling = PenaltyScaling::Scaled,
                          const BatchOptions& opts = {});

struct GaussNewtonResult {
  Trajectory x;
  std::vector<Trajectory> iterates;  ///< x^(1), x^(2), ...
  std::size_t iterations = 0;
  bool converged = false;
};

/// Dense Gauss-Newton on the penalized nonlinear x-subproblem with the same
/// stopping rule as cieks_solve.
GaussNewtonResult batch_gauss_newton(const NonlinearModel& model, const ConstraintSet& cons,
                                     const SplitState& split, const Trajectory& init,
                                     const MeasurementSequence& meas,
                                     const InnerOptions& inner = {},
                                     PenaltyScaling scaling = PenaltyScaling::Scaled,
                                     const BatchOptions& opts = {});

/// Multiplier state stacked over time (step 0 first), as used by the batch loop.
struct BatchIterate {
  Trajectory x;
  Vector aux;
  Vector ineq_mult;
  Vector eq_mult;
};

struct BatchSplitResult {
  Trajectory x;
  Trajectory init;
  ConvergenceTrace trace;
  bool converged = false;
  std::vector<BatchIterate> iterates;  ///< filled when opts.record_iterates
};

/// The splitting loops of ADMM, PRS and split Bregman written over stacked
/// vectors, with dense Gauss-Newton x-updates. opts.method selects the
/// method; opts.init overrides the unconstrained start.
BatchSplitResult batch_split_solve(const NonlinearModel& model, const ConstraintSet& cons,
                                   const MeasurementSequence& meas, const SolveOptions& opts,
                                   const BatchOptions& batch = {});

/// Bytes the dense normal matrix for `steps` x `state_dim` would need.
std::size_t dense_bytes(std::size_t steps, std::size_t state_dim) noexcept;

}  // namespace csmooth::oracle
