#pragma once

#include "csmooth/cks.hpp"

namespace csmooth {

struct InnerOptions {
  std::size_t max_inner = 10;
  double tol_inner = 1e-8;  ///< on |x^(i+1) - x^(i)|_inf
  /// Keep every iterate (x^(1), x^(2), ...) in CieksResult::iterates.
  bool record_iterates = false;

  void validate() const;
};

struct CieksResult {
  Trajectory x;
  std::size_t iterations = 0;  ///< number of linearize + solve rounds
  bool converged = false;
  double last_step = 0.0;      ///< |x^(i+1) - x^(i)|_inf of the final round
  std::vector<Trajectory> iterates;
};

/// First-order expansion of every model and constraint function around
/// `traj`: A_t = J_a(x_{t-1}), b_t = a_t(x_{t-1}) - A_t x_{t-1}, and the same
/// pattern for (H, g), (C, d), (E, f) at x_t.
AffineModel linearize_at(const NonlinearModel& model, const ConstraintSet& cons,
                         const Trajectory& traj);

/// Constrained iterated extended Kalman smoother: repeats linearize_at and
/// cks_solve from `init` until the iterate moves by at most tol_inner or
/// max_inner rounds have run. This is Gauss-Newton on the penalized
/// x-subproblem, computed in O(T).
CieksResult cieks_solve(const NonlinearModel& model, const ConstraintSet& cons,
                        const SplitState& split, const Trajectory& init,
                        const MeasurementSequence& meas, const InnerOptions& opts = {},
                        PenaltyScaling scaling = PenaltyScaling::Scaled);

/// Unconstrained IEKS started from the prior rollout.
CieksResult unconstrained_ieks(const NonlinearModel& model, const MeasurementSequence& meas,
                               const InnerOptions& opts = {});

}  // namespace csmooth
