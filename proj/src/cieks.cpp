#include "csmooth/cieks.hpp"

#include <string>

namespace csmooth {

void InnerOptions::validate() const {
  if (max_inner < 1) throw ContractError("InnerOptions: max_inner must be >= 1");
  if (!(tol_inner > 0.0)) throw ContractError("InnerOptions: tol_inner must be positive");
}

AffineModel linearize_at(const NonlinearModel& model, const ConstraintSet& cons,
                         const Trajectory& traj) {
  check_consistent(cons, traj);
  if (traj.steps() != model.steps() || traj.dim() != model.state_dim()) {
    throw ContractError("linearize_at: trajectory shape does not match the model");
  }
  std::vector<AffineStep> steps(model.steps());
  for (std::size_t t = 0; t < model.steps(); ++t) {
    const Vector x = traj[t];
    AffineStep& s = steps[t];
    if (t > 0) {
      const Vector xp = traj[t - 1];
      s.A = model.transition_jacobian(t, xp);
      s.b = model.transition(t, xp) - s.A * xp;
    }
    s.H = model.measurement_jacobian(t, x);
    s.g = model.measurement(t, x) - s.H * x;
    s.C = cons.inequality_jacobian(t, x);
    s.d = cons.inequality(t, x) - s.C * x;
    s.E = cons.equality_jacobian(t, x);
    s.f = cons.equality(t, x) - s.E * x;
    if (!s.A.allFinite() || !s.H.allFinite() || !s.C.allFinite() || !s.E.allFinite()) {
      throw NumericError("linearize_at: non-finite Jacobian at step " + std::to_string(t));
    }
  }
  return AffineModel(std::move(steps), model.process_covs(), model.meas_covs(),
                     model.prior_mean(), model.prior_cov());
}

CieksResult cieks_solve(const NonlinearModel& model, const ConstraintSet& cons,
                        const SplitState& split, const Trajectory& init,
                        const MeasurementSequence& meas, const InnerOptions& opts,
                        PenaltyScaling scaling) {
  opts.validate();
  check_consistent(model, init, meas);
  CieksResult out;
  out.x = init;
  for (std::size_t i = 0; i < opts.max_inner; ++i) {
    Trajectory next;
    try {
      next = cks_solve(linearize_at(model, cons, out.x), split, meas, scaling);
    } catch (const NumericError& e) {
      throw DivergenceError(std::string("cieks_solve: ") + e.what(), i + 1);
    }
    if (!next.all_finite()) throw DivergenceError("cieks_solve: non-finite iterate", i + 1);
    out.last_step = next.max_abs_diff(out.x);
    out.x = std::move(next);
    out.iterations = i + 1;
    if (opts.record_iterates) out.iterates.push_back(out.x);
    if (out.last_step <= opts.tol_inner) {
      out.converged = true;
      break;
    }
  }
  return out;
}

CieksResult unconstrained_ieks(const NonlinearModel& model, const MeasurementSequence& meas,
                               const InnerOptions& opts) {
  const ConstraintSet none = ConstraintSet::none(model.steps(), model.state_dim());
  const SplitState split(none, SplitParams{});
  return cieks_solve(model, none, split, prior_rollout(model), meas, opts);
}

}  // namespace csmooth
