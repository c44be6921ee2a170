#include "csmooth/splitting.hpp"

#include <chrono>

namespace csmooth {
namespace {

Vector positive_part(const Vector& v) { return v.cwiseMax(0.0); }

void check_state(const SplitState& state, const Trajectory& x, const ConstraintSet& cons) {
  check_consistent(cons, x);
  if (state.steps() != cons.steps()) throw ContractError("split state step mismatch");
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Admm: return "admm";
    case Method::Prs: return "prs";
    case Method::Sbm: return "sbm";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "admm") return Method::Admm;
  if (name == "prs") return Method::Prs;
  if (name == "sbm") return Method::Sbm;
  throw ContractError("unknown method '" + std::string(name) + "'");
}

void ConvergenceTrace::push(double th, const Violation& viol, double step, double seconds) {
  theta.push_back(th);
  max_ineq.push_back(viol.max_ineq);
  max_eq.push_back(viol.max_eq);
  step_norm.push_back(step);
  wall_seconds.push_back(seconds);
}

void SolveOptions::validate() const {
  params.validate();
  inner.validate();
  if (!(tol_step >= 0.0) || !(tol_violation >= 0.0)) {
    throw ContractError("SolveOptions: tolerances must be nonnegative");
  }
}

SplitState initial_split_state(const ConstraintSet& cons, const Trajectory& x0,
                               const SplitParams& params) {
  check_consistent(cons, x0);
  SplitState state(cons, params);
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    if (cons.ineq_dim(t) > 0) state.set_aux(t, positive_part(-cons.inequality(t, x0[t])));
  }
  return state;
}

SplitState admm_step(const SplitState& state, const Trajectory& x_new, const ConstraintSet& cons) {
  check_state(state, x_new, cons);
  const double rho1 = state.params().rho1;
  const double rho2 = state.params().rho2;
  SplitState next = state;
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    if (cons.ineq_dim(t) > 0) {
      const Vector c = cons.inequality(t, x_new[t]);
      const Vector& eta = state.ineq_mult(t);
      Vector v = positive_part(-c - eta / rho1);
      next.set_ineq_mult(t, eta + rho1 * (c + v));
      next.set_aux(t, std::move(v));
    }
    if (cons.eq_dim(t) > 0) {
      next.set_eq_mult(t, state.eq_mult(t) + rho2 * cons.equality(t, x_new[t]));
    }
  }
  return next;
}

SplitState prs_step(const SplitState& state, const Trajectory& x_new, const ConstraintSet& cons) {
  check_state(state, x_new, cons);
  const SplitParams& prm = state.params();
  const double step1 = prm.alpha1 * prm.rho1;
  const double step2 = prm.alpha2 * prm.rho2;
  SplitState next = state;
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    if (cons.ineq_dim(t) > 0) {
      const Vector c = cons.inequality(t, x_new[t]);
      const Vector& eta = state.ineq_mult(t);
      const Vector eta_half = eta + step1 * (c + state.aux(t));
      const Vector& eta_for_aux = prm.prs_half_step_aux ? eta_half : eta;
      Vector v = positive_part(-c - eta_for_aux / prm.rho1);
      next.set_ineq_mult(t, eta_half + step1 * (c + v));
      next.set_aux(t, std::move(v));
    }
    if (cons.eq_dim(t) > 0) {
      const Vector e = cons.equality(t, x_new[t]);
      const Vector zeta_half = state.eq_mult(t) + step2 * e;
      next.set_eq_mult(t, zeta_half + step2 * e);
    }
  }
  return next;
}

std::pair<SplitState, Trajectory> sbm_step(const SplitState& state, const XUpdate& solver,
                                           const ConstraintSet& cons, const Trajectory& warm) {
  check_state(state, warm, cons);
  const std::size_t sweeps = state.params().sbm_inner;
  if (sweeps < 1) throw ContractError("sbm_step: inner count must be >= 1");
  SplitState next = state;
  Trajectory x = warm;
  for (std::size_t j = 0; j < sweeps; ++j) {
    x = solver(next, PenaltyScaling::Unscaled, x);
    for (std::size_t t = 0; t < cons.steps(); ++t) {
      if (cons.ineq_dim(t) > 0) {
        next.set_aux(t, positive_part(-cons.inequality(t, x[t]) - state.ineq_mult(t)));
      }
    }
  }
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    if (cons.ineq_dim(t) > 0) {
      next.set_ineq_mult(t, state.ineq_mult(t) + cons.inequality(t, x[t]) + next.aux(t));
    }
    if (cons.eq_dim(t) > 0) {
      next.set_eq_mult(t, state.eq_mult(t) + cons.equality(t, x[t]));
    }
  }
  return {std::move(next), std::move(x)};
}

XUpdate smoother_x_update(const NonlinearModel& model, const ConstraintSet& cons,
                          const MeasurementSequence& meas, const InnerOptions& inner,
                          std::size_t* passes) {
  const bool affine = model.affine() && cons.affine();
  return [&model, &cons, &meas, inner, passes, affine](const SplitState& state,
                                                       PenaltyScaling scaling,
                                                       const Trajectory& warm) -> Trajectory {
    if (affine) {
      if (passes) ++*passes;
      return cks_solve(linearize_at(model, cons, warm), state, meas, scaling);
    }
    CieksResult r = cieks_solve(model, cons, state, warm, meas, inner, scaling);
    if (passes) *passes += r.iterations;
    return std::move(r.x);
  };
}

SolveResult solve(const NonlinearModel& model, const ConstraintSet& cons,
                  const MeasurementSequence& meas, const SolveOptions& opts) {
  using Clock = std::chrono::steady_clock;
  opts.validate();
  if (cons.steps() != model.steps() || cons.state_dim() != model.state_dim()) {
    throw ContractError("solve: constraint set does not match the model");
  }
  const auto start = Clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  SolveResult out;
  const XUpdate x_update = smoother_x_update(model, cons, meas, opts.inner, &out.inner_iterations);

  if (opts.init) {
    check_consistent(model, *opts.init, meas);
    out.init = *opts.init;
  } else {
    const ConstraintSet none = ConstraintSet::none(model.steps(), model.state_dim());
    const SplitState empty(none, opts.params);
    const XUpdate unconstrained =
        smoother_x_update(model, none, meas, opts.inner, &out.inner_iterations);
    try {
      out.init = unconstrained(empty, PenaltyScaling::Scaled, prior_rollout(model));
    } catch (const NumericError& e) {
      throw SolveFailure(std::string("solve: initialization failed: ") + e.what(), 0, {});
    }
  }
  out.x = out.init;
  out.state = initial_split_state(cons, out.x, opts.params);

  for (std::size_t k = 1; k <= opts.max_outer; ++k) {
    Trajectory prev = out.x;
    double theta = 0.0;
    try {
      switch (opts.method) {
        case Method::Admm:
          out.x = x_update(out.state, PenaltyScaling::Scaled, out.x);
          out.state = admm_step(out.state, out.x, cons);
          break;
        case Method::Prs:
          out.x = x_update(out.state, PenaltyScaling::Scaled, out.x);
          out.state = prs_step(out.state, out.x, cons);
          break;
        case Method::Sbm: {
          auto [state, x] = sbm_step(out.state, x_update, cons, out.x);
          out.state = std::move(state);
          out.x = std::move(x);
          break;
        }
      }
      if (!out.x.all_finite()) throw NumericError("non-finite trajectory");
      theta = eval_theta(model, out.x, meas);
    } catch (const NumericError& e) {
      throw SolveFailure(std::string("solve: ") + e.what() + " at outer iteration " +
                             std::to_string(k),
                         k, out.trace);
    }
    const double step = out.x.max_abs_diff(prev);
    const Violation viol = eval_violation(cons, out.x);
    out.trace.push(theta, viol, step, elapsed());
    if (opts.record_iterates) out.iterates.push_back({out.x, out.state});
    if (step <= opts.tol_step && viol.max() <= opts.tol_violation) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace csmooth
