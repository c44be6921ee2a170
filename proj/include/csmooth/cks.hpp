#pragma once

#include "csmooth/model.hpp"
#include "csmooth/split_state.hpp"

#include <memory>

namespace csmooth {

/// Affine model and constraint blocks for one step:
///   a_t(x) = A x + b,  h_t(x) = H x + g,  c_t(x) = C x + d,  e_t(x) = E x + f.
/// A and b are ignored at step 0. C/d and E/f may have zero rows.
struct AffineStep {
  Matrix A;
  Vector b;
  Matrix H;
  Vector g;
  Matrix C;
  Vector d;
  Matrix E;
  Vector f;
};

/// Affine state-space model with affine constraints, sharing the noise
/// covariances and prior of a NonlinearModel.
class AffineModel {
 public:
  AffineModel(std::vector<AffineStep> steps, PerStep<Matrix> process_cov, PerStep<Matrix> meas_cov,
              Vector prior_mean, Matrix prior_cov);

  std::size_t steps() const noexcept { return steps_.size(); }
  std::size_t state_dim() const noexcept { return static_cast<std::size_t>(prior_mean_.size()); }
  std::size_t meas_dim() const noexcept { return meas_dim_; }

  const AffineStep& step(std::size_t t) const { return steps_[t]; }
  const Matrix& process_cov(std::size_t t) const { return process_cov_[t]; }
  const Matrix& meas_cov(std::size_t t) const { return meas_cov_[t]; }
  const PerStep<Matrix>& process_covs() const noexcept { return process_cov_; }
  const PerStep<Matrix>& meas_covs() const noexcept { return meas_cov_; }
  const Vector& prior_mean() const noexcept { return prior_mean_; }
  const Matrix& prior_cov() const noexcept { return prior_cov_; }

  /// The same model as a NonlinearModel flagged affine, with exact Jacobians.
  NonlinearModel as_model() const;
  /// The constraint blocks as a ConstraintSet flagged affine.
  ConstraintSet as_constraints() const;

 private:
  std::shared_ptr<const std::vector<AffineStep>> shared_steps() const;

  std::vector<AffineStep> steps_;
  PerStep<Matrix> process_cov_;
  PerStep<Matrix> meas_cov_;
  Vector prior_mean_;
  Matrix prior_cov_;
  std::size_t meas_dim_ = 0;
};

/// How multipliers enter the penalty terms of the x-subproblem.
///   Scaled:   rho1/2 |c + v + eta/rho1|^2 + rho2/2 |e + zeta/rho2|^2   (ADMM, PRS)
///   Unscaled: rho1/2 |c + v + eta|^2      + rho2/2 |e + zeta|^2        (split Bregman)
enum class PenaltyScaling { Scaled, Unscaled };

/// Artificial observations that turn the penalty terms into measurements:
/// z_t = C x_t + d + sigma_t with sigma_t ~ N(0, I/rho1), and
/// w_t = E x_t + f + delta_t with delta_t ~ N(0, I/rho2).
struct PseudoMeasurements {
  std::vector<Vector> ineq_obs;  ///< z_t
  std::vector<Vector> eq_obs;    ///< w_t
  double ineq_var = 1.0;         ///< Sigma_t = ineq_var * I
  double eq_var = 1.0;           ///< Delta_t = eq_var * I

  Matrix ineq_cov(std::size_t t) const {
    return ineq_var * Matrix::Identity(ineq_obs[t].size(), ineq_obs[t].size());
  }
  Matrix eq_cov(std::size_t t) const {
    return eq_var * Matrix::Identity(eq_obs[t].size(), eq_obs[t].size());
  }
};

/// z_t = -v_t - eta_t/rho1, w_t = -zeta_t/rho2 (Scaled) or
/// z_t = -v_t - eta_t,      w_t = -zeta_t      (Unscaled); Sigma = I/rho1, Delta = I/rho2.
PseudoMeasurements build_pseudo(const SplitState& split,
                                PenaltyScaling scaling = PenaltyScaling::Scaled);

struct FilterOptions {
  /// Apply (y; z; w) as one stacked update instead of three sequential ones.
  bool stacked_update = false;
};

/// Forward pass. Index t of pred_* holds the one-step prediction of x_t
/// (the prior at t = 0).
struct FilterResult {
  Trajectory mean;
  std::vector<Matrix> cov;
  Trajectory pred_mean;
  std::vector<Matrix> pred_cov;
};

struct SmootherOutput {
  FilterResult filtered;
  Trajectory mean;
  std::vector<Matrix> cov;  ///< empty when covariances were not requested
};

FilterResult kalman_filter(const AffineModel& aff, const PseudoMeasurements& pseudo,
                           const MeasurementSequence& meas, FilterOptions opts = {});

/// Rauch-Tung-Striebel backward pass over a completed forward pass.
SmootherOutput rts_smooth(FilterResult filtered, const AffineModel& aff,
                          bool with_covariances = true);

/// Minimizer of the penalized affine MAP objective: build_pseudo, then
/// kalman_filter, then rts_smooth. Returns the smoothed means.
Trajectory cks_solve(const AffineModel& aff, const SplitState& split,
                     const MeasurementSequence& meas,
                     PenaltyScaling scaling = PenaltyScaling::Scaled);

}  // namespace csmooth
