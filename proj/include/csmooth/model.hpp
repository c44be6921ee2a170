#pragma once

#include "csmooth/types.hpp"

#include <functional>
#include <random>

namespace csmooth {

/// f(t, x) for 0-based step t.
using StepFunction = std::function<Vector(std::size_t, const Vector&)>;
/// Jacobian of a StepFunction with respect to x.
using StepJacobian = std::function<Matrix(std::size_t, const Vector&)>;

/// Central-difference Jacobian with a fixed step h:
/// column j is (f(x + h e_j) - f(x - h e_j)) / (2h).
Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& f,
                            const Vector& x, double h);

/// Central-difference Jacobian with step 1e-6 * max(1, |x_j|) per coordinate.
Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& f,
                            const Vector& x);

/// Gaussian state-space model
///
///   x_t = a_t(x_{t-1}) + q_t,   q_t ~ N(0, Q_t),   t = 1..T-1
///   y_t = h_t(x_t) + r_t,       r_t ~ N(0, R_t),   t = 0..T-1
///   x_0 ~ N(m, P)
///
/// Steps are 0-based; the transition indexed by t maps x_{t-1} to x_t, so
/// a_0 is never evaluated. Jacobians fall back to central differences when
/// no analytic form is supplied. Immutable after construction.
class NonlinearModel {
 public:
  struct Definition {
    std::size_t steps = 0;
    std::size_t state_dim = 0;
    std::size_t meas_dim = 0;
    StepFunction transition;
    StepJacobian transition_jacobian;  // optional
    StepFunction measurement;
    StepJacobian measurement_jacobian;  // optional
    PerStep<Matrix> process_cov;
    PerStep<Matrix> meas_cov;
    Vector prior_mean;
    Matrix prior_cov;
    /// Declares a_t and h_t affine; solvers may then skip re-linearization.
    bool affine = false;
  };

  explicit NonlinearModel(Definition def);

  /// Replicates one time-invariant definition across all steps.
  static NonlinearModel time_invariant(std::size_t steps,
                                       std::function<Vector(const Vector&)> transition,
                                       std::function<Vector(const Vector&)> measurement,
                                       Matrix process_cov, Matrix meas_cov,
                                       Vector prior_mean, Matrix prior_cov,
                                       std::function<Matrix(const Vector&)> transition_jacobian = {},
                                       std::function<Matrix(const Vector&)> measurement_jacobian = {});

  std::size_t steps() const noexcept { return def_.steps; }
  std::size_t state_dim() const noexcept { return def_.state_dim; }
  std::size_t meas_dim() const noexcept { return def_.meas_dim; }
  bool affine() const noexcept { return def_.affine; }
  bool has_analytic_jacobians() const noexcept {
    return static_cast<bool>(def_.transition_jacobian) && static_cast<bool>(def_.measurement_jacobian);
  }

  Vector transition(std::size_t t, const Vector& x_prev) const;
  Matrix transition_jacobian(std::size_t t, const Vector& x_prev) const;
  Vector measurement(std::size_t t, const Vector& x) const;
  Matrix measurement_jacobian(std::size_t t, const Vector& x) const;

  /// Central-difference Jacobians regardless of analytic availability.
  Matrix transition_jacobian_fd(std::size_t t, const Vector& x_prev) const;
  Matrix measurement_jacobian_fd(std::size_t t, const Vector& x) const;

  const Matrix& process_cov(std::size_t t) const { return def_.process_cov[t]; }
  const Matrix& meas_cov(std::size_t t) const { return def_.meas_cov[t]; }
  const Vector& prior_mean() const noexcept { return def_.prior_mean; }
  const Matrix& prior_cov() const noexcept { return def_.prior_cov; }

  const PerStep<Matrix>& process_covs() const noexcept { return def_.process_cov; }
  const PerStep<Matrix>& meas_covs() const noexcept { return def_.meas_cov; }

  const Eigen::LLT<Matrix>& process_chol(std::size_t t) const { return process_chol_[t]; }
  const Eigen::LLT<Matrix>& meas_chol(std::size_t t) const { return meas_chol_[t]; }
  const Eigen::LLT<Matrix>& prior_chol() const noexcept { return prior_chol_; }

 private:
  Definition def_;
  PerStep<Eigen::LLT<Matrix>> process_chol_;
  PerStep<Eigen::LLT<Matrix>> meas_chol_;
  Eigen::LLT<Matrix> prior_chol_;
};

/// Per-step equality constraints e_t(x_t) = 0 and inequality constraints
/// c_t(x_t) <= 0. A step with zero rows carries no constraint of that kind.
class ConstraintSet {
 public:
  struct Definition {
    std::size_t steps = 0;
    std::size_t state_dim = 0;
    PerStep<std::size_t> eq_dims{std::size_t{0}};
    PerStep<std::size_t> ineq_dims{std::size_t{0}};
    StepFunction equality;
    StepJacobian equality_jacobian;  // optional
    StepFunction inequality;
    StepJacobian inequality_jacobian;  // optional
    bool affine = false;
  };

  explicit ConstraintSet(Definition def);

  /// No constraints at any step.
  static ConstraintSet none(std::size_t steps, std::size_t state_dim);

  std::size_t steps() const noexcept { return def_.steps; }
  std::size_t state_dim() const noexcept { return def_.state_dim; }
  bool affine() const noexcept { return def_.affine; }
  std::size_t eq_dim(std::size_t t) const { return def_.eq_dims[t]; }
  std::size_t ineq_dim(std::size_t t) const { return def_.ineq_dims[t]; }
  bool has_equalities() const noexcept { return has_eq_; }
  bool has_inequalities() const noexcept { return has_ineq_; }
  bool empty() const noexcept { return !has_eq_ && !has_ineq_; }

  /// e_t(x); throws ContractError when the returned size differs from eq_dim(t).
  Vector equality(std::size_t t, const Vector& x) const;
  Matrix equality_jacobian(std::size_t t, const Vector& x) const;
  Vector inequality(std::size_t t, const Vector& x) const;
  Matrix inequality_jacobian(std::size_t t, const Vector& x) const;

  Matrix equality_jacobian_fd(std::size_t t, const Vector& x) const;
  Matrix inequality_jacobian_fd(std::size_t t, const Vector& x) const;

 private:
  Definition def_;
  bool has_eq_ = false;
  bool has_ineq_ = false;
};

/// Throws ContractError unless the model, trajectory and measurements agree
/// in length and per-step dimension.
void check_consistent(const NonlinearModel& model, const Trajectory& traj,
                      const MeasurementSequence& meas);
void check_consistent(const ConstraintSet& cons, const Trajectory& traj);

/// Negative log-posterior up to a constant:
///   1/2 sum_t |y_t - h_t(x_t)|^2_{R_t^-1} + 1/2 sum_{t>=1} |x_t - a_t(x_{t-1})|^2_{Q_t^-1}
///   + 1/2 |x_0 - m|^2_{P^-1}.
double eval_theta(const NonlinearModel& model, const Trajectory& traj,
                  const MeasurementSequence& meas);

/// The three groups of terms that make up eval_theta.
struct ThetaBreakdown {
  double prior = 0.0;
  double measurement = 0.0;
  double transition = 0.0;
  double total() const noexcept { return prior + measurement + transition; }
};

ThetaBreakdown theta_breakdown(const NonlinearModel& model, const Trajectory& traj,
                               const MeasurementSequence& meas);

/// Contribution of each step: measurement term at t, transition term into
/// t (t >= 1), and the prior term at t = 0. Sums to eval_theta.
std::vector<double> theta_step_terms(const NonlinearModel& model, const Trajectory& traj,
                                     const MeasurementSequence& meas);

struct Violation {
  double max_ineq = 0.0;  ///< max over t, i of max(0, c_t(x_t)_i)
  double max_eq = 0.0;    ///< max over t, i of |e_t(x_t)_i|
  double max() const noexcept { return max_ineq > max_eq ? max_ineq : max_eq; }
};

Violation eval_violation(const ConstraintSet& cons, const Trajectory& traj);

struct JacobianReport {
  double max_rel_error = 0.0;
  bool ok = true;
};

/// Compares analytic Jacobians (where supplied) against central differences
/// at `samples` points drawn around `center` with per-coordinate std `spread`.
/// Relative error is |J - J_fd|_max / max(1, |J_fd|_max).
JacobianReport validate_jacobians(const NonlinearModel& model, const ConstraintSet& cons,
                                  const Trajectory& center, double spread, std::size_t samples,
                                  std::mt19937_64& rng, double rel_tol = 1e-4);

/// x_0 = m, x_t = a_t(x_{t-1}).
Trajectory prior_rollout(const NonlinearModel& model);

}  // namespace csmooth
