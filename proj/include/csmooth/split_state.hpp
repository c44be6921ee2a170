#pragma once

#include "csmooth/model.hpp"

namespace csmooth {

/// Penalty and relaxation parameters shared by the splitting methods.
struct SplitParams {
  double rho1 = 1.0;    ///< inequality penalty
  double rho2 = 1.0;    ///< equality penalty
  double alpha1 = 0.5;  ///< PRS relaxation for the inequality multiplier, in (0, 1)
  double alpha2 = 0.5;  ///< PRS relaxation for the equality multiplier, in (0, 1)
  std::size_t sbm_inner = 1;  ///< x/v sweeps per split Bregman multiplier update
  /// PRS only: use the half-step multiplier in the auxiliary update instead
  /// of the previous one.
  bool prs_half_step_aux = false;

  /// Throws ContractError on out-of-range values.
  void validate() const;
};

/// Auxiliary variables v_t >= 0, inequality multipliers eta_t and equality
/// multipliers zeta_t for every step, plus the parameters that produced them.
class SplitState {
 public:
  SplitState() = default;

  /// v, eta, zeta all zero, sized to the constraint set.
  SplitState(const ConstraintSet& cons, SplitParams params);

  std::size_t steps() const noexcept { return aux_.size(); }
  const SplitParams& params() const noexcept { return params_; }
  SplitParams& params() noexcept { return params_; }

  const Vector& aux(std::size_t t) const { return aux_[t]; }
  const Vector& ineq_mult(std::size_t t) const { return ineq_mult_[t]; }
  const Vector& eq_mult(std::size_t t) const { return eq_mult_[t]; }

  /// Sets v_t; throws ContractError on a negative entry or a size change.
  void set_aux(std::size_t t, Vector v);
  void set_ineq_mult(std::size_t t, Vector eta);
  void set_eq_mult(std::size_t t, Vector zeta);

  /// Smallest v entry over all steps (+inf when there are none).
  double min_aux() const;

  /// Largest absolute difference in v, eta and zeta.
  double max_abs_diff(const SplitState& other) const;

  std::size_t ineq_dim(std::size_t t) const { return static_cast<std::size_t>(aux_[t].size()); }
  std::size_t eq_dim(std::size_t t) const { return static_cast<std::size_t>(eq_mult_[t].size()); }

 private:
  SplitParams params_;
  std::vector<Vector> aux_;
  std::vector<Vector> ineq_mult_;
  std::vector<Vector> eq_mult_;
};

}  // namespace csmooth
