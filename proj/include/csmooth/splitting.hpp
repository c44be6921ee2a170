#pragma once

#include "csmooth/cieks.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <utility>

namespace csmooth {

enum class Method { Admm, Prs, Sbm };

std::string_view to_string(Method m) noexcept;
/// Accepts "admm", "prs", "sbm" (case-sensitive); throws ContractError otherwise.
Method parse_method(std::string_view name);

/// Per-outer-iteration record of a splitting run.
struct ConvergenceTrace {
  std::vector<double> theta;
  std::vector<double> max_ineq;
  std::vector<double> max_eq;
  std::vector<double> step_norm;     ///< |x^(k) - x^(k-1)|_inf
  std::vector<double> wall_seconds;  ///< cumulative since the solve started

  std::size_t size() const noexcept { return theta.size(); }
  bool empty() const noexcept { return theta.empty(); }
  void push(double th, const Violation& viol, double step, double seconds);
};

struct SolveOptions {
  Method method = Method::Admm;
  SplitParams params;
  std::size_t max_outer = 100;
  double tol_step = 1e-8;
  double tol_violation = 1e-6;
  InnerOptions inner;
  /// Keep (x, split state) after every outer iteration.
  bool record_iterates = false;
  /// Starting trajectory; defaults to the unconstrained smoother solution.
  std::optional<Trajectory> init;

  void validate() const;
};

struct IterateRecord {
  Trajectory x;
  SplitState state;
};

struct SolveResult {
  Trajectory x;
  SplitState state;
  ConvergenceTrace trace;
  Trajectory init;                  ///< x^(0)
  bool converged = false;           ///< stopped on tolerance rather than max_outer
  std::size_t inner_iterations = 0; ///< smoother passes across all x-updates
  std::vector<IterateRecord> iterates;
};

/// Thrown when an x-update diverges; carries the trace up to the failure.
class SolveFailure : public NumericError {
 public:
  SolveFailure(const std::string& what, std::size_t iteration, ConvergenceTrace trace)
      : NumericError(what), iteration_(iteration), trace_(std::move(trace)) {}

  std::size_t iteration() const noexcept { return iteration_; }
  const ConvergenceTrace& trace() const noexcept { return trace_; }

 private:
  std::size_t iteration_;
  ConvergenceTrace trace_;
};

/// x-subproblem solver: minimizer for the given split state and penalty
/// form, warm-started at the last argument.
using XUpdate =
    std::function<Trajectory(const SplitState&, PenaltyScaling, const Trajectory&)>;

/// v_t = max(0, -c_t(x_t)), eta = 0, zeta = 0.
SplitState initial_split_state(const ConstraintSet& cons, const Trajectory& x0,
                               const SplitParams& params);

/// ADMM multiplier/auxiliary step after the x-update:
///   v    <- max(0, -c(x) - eta/rho1)
///   eta  <- eta + rho1 (c(x) + v)
///   zeta <- zeta + rho2 e(x)
SplitState admm_step(const SplitState& state, const Trajectory& x_new, const ConstraintSet& cons);

/// Peaceman-Rachford step: two relaxed multiplier updates around the
/// auxiliary update. The auxiliary update uses the previous eta unless
/// params().prs_half_step_aux is set.
SplitState prs_step(const SplitState& state, const Trajectory& x_new, const ConstraintSet& cons);

/// Split Bregman: M sweeps of (x-update with unscaled multipliers,
/// v <- max(0, -c(x) - eta)), then eta <- eta + c(x) + v, zeta <- zeta + e(x).
std::pair<SplitState, Trajectory> sbm_step(const SplitState& state, const XUpdate& solver,
                                           const ConstraintSet& cons, const Trajectory& warm);

/// x-update backed by the constrained smoothers: one CKS pass when model and
/// constraints are affine, CIEKS otherwise. Counts smoother passes in
/// `passes` when given.
XUpdate smoother_x_update(const NonlinearModel& model, const ConstraintSet& cons,
                          const MeasurementSequence& meas, const InnerOptions& inner,
                          std::size_t* passes = nullptr);

/// Runs the selected splitting method to max_outer iterations or until both
/// the step and the constraint violation fall below tolerance.
SolveResult solve(const NonlinearModel& model, const ConstraintSet& cons,
                  const MeasurementSequence& meas, const SolveOptions& opts = {});

}  // namespace csmooth
