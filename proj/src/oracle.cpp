#include "csmooth/oracle.hpp"

#include <chrono>
#include <new>
#include <string>

namespace csmooth::oracle {
namespace {

using Index = Eigen::Index;

// Accumulates H += J^T W J and grad += J^T W r for residual blocks that touch
// one or two consecutive states.
class NormalEquations {
 public:
  NormalEquations(std::size_t steps, std::size_t nx, const BatchOptions& opts) : nx_(static_cast<Index>(nx)) {
    if (steps == 0) throw ContractError("batch solve: need at least one step");
    const std::size_t bytes = dense_bytes(steps, nx);
    if (bytes > opts.max_dense_bytes) {
      throw SizeLimitError("batch solve: dense system for T=" + std::to_string(steps) +
                           " needs " + std::to_string(bytes >> 20) + " MiB, limit is " +
                           std::to_string(opts.max_dense_bytes >> 20) + " MiB");
    }
    const Index n = static_cast<Index>(steps) * nx_;
    try {
      hessian_.setZero(n, n);
      grad_.setZero(n);
    } catch (const std::bad_alloc&) {
      throw SizeLimitError("batch solve: out of memory allocating dense system");
    }
  }

  void add(std::size_t t, const Matrix& jac, const Vector& r, const Matrix& w) {
    if (jac.rows() == 0) return;
    const Matrix wj = w * jac;
    block(t, t) += jac.transpose() * wj;
    grad_.segment(static_cast<Index>(t) * nx_, nx_) += jac.transpose() * (w * r);
  }

  // Residual r(x_{t-1}, x_t) with Jacobians jp (wrt x_{t-1}) and jc (wrt x_t).
  void add_pair(std::size_t t, const Matrix& jp, const Matrix& jc, const Vector& r,
                const Matrix& w) {
    const Matrix wjp = w * jp;
    const Matrix wjc = w * jc;
    block(t - 1, t - 1) += jp.transpose() * wjp;
    block(t, t) += jc.transpose() * wjc;
    block(t - 1, t) += jp.transpose() * wjc;
    block(t, t - 1) += jc.transpose() * wjp;
    const Vector wr = w * r;
    grad_.segment(static_cast<Index>(t - 1) * nx_, nx_) += jp.transpose() * wr;
    grad_.segment(static_cast<Index>(t) * nx_, nx_) += jc.transpose() * wr;
  }

  Matrix& hessian() { return hessian_; }
  const Vector& grad() const { return grad_; }

 private:
  Eigen::Block<Matrix> block(std::size_t i, std::size_t j) {
    return hessian_.block(static_cast<Index>(i) * nx_, static_cast<Index>(j) * nx_, nx_, nx_);
  }

  Index nx_;
  Matrix hessian_;
  Vector grad_;
};

// Weight matrices for the oracle are explicit dense inverses.
Matrix inverse_of(const Matrix& m) { return m.inverse(); }

double ineq_shift_scale(const SplitState& split, PenaltyScaling scaling) {
  return scaling == PenaltyScaling::Scaled ? 1.0 / split.params().rho1 : 1.0;
}
double eq_shift_scale(const SplitState& split, PenaltyScaling scaling) {
  return scaling == PenaltyScaling::Scaled ? 1.0 / split.params().rho2 : 1.0;
}

// Solves H delta = -grad in place over H.
Vector dense_newton_step(NormalEquations& ne) {
  Matrix& h = ne.hessian();
  Eigen::LLT<Eigen::Ref<Matrix>> llt(h);
  if (llt.info() == Eigen::Success) return llt.solve(-ne.grad());
  throw NumericError("batch solve: normal matrix is not positive definite");
}

Vector flatten(const Trajectory& x) {
  return Eigen::Map<const Vector>(x.matrix().data(), x.matrix().size());
}

Trajectory unflatten(const Vector& v, std::size_t steps, std::size_t nx) {
  return Trajectory(Eigen::Map<const Matrix>(v.data(), static_cast<Index>(nx), static_cast<Index>(steps)));
}

// Gauss-Newton normal equations of the penalized nonlinear x-objective,
// linearized at xbar.
NormalEquations linearized_system(const NonlinearModel& model, const ConstraintSet& cons,
                                  const SplitState& split, const Trajectory& xbar,
                                  const MeasurementSequence& meas, PenaltyScaling scaling,
                                  const BatchOptions& opts) {
  const std::size_t steps = model.steps();
  const std::size_t nx = model.state_dim();
  NormalEquations ne(steps, nx, opts);
  const Matrix eye = Matrix::Identity(static_cast<Index>(nx), static_cast<Index>(nx));
  const double rho1 = split.params().rho1;
  const double rho2 = split.params().rho2;
  const double s1 = ineq_shift_scale(split, scaling);
  const double s2 = eq_shift_scale(split, scaling);

  const Vector x0 = xbar[0];
  ne.add(0, eye, x0 - model.prior_mean(), inverse_of(model.prior_cov()));
  Matrix q_inv;
  Matrix r_inv;
  for (std::size_t t = 0; t < steps; ++t) {
    const Vector x = xbar[t];
    if (t == 0 || !model.meas_covs().shared()) r_inv = inverse_of(model.meas_cov(t));
    ne.add(t, model.measurement_jacobian(t, x), model.measurement(t, x) - meas[t], r_inv);
    if (t > 0) {
      if (t == 1 || !model.process_covs().shared()) q_inv = inverse_of(model.process_cov(t));
      const Vector xp = xbar[t - 1];
      ne.add_pair(t, -model.transition_jacobian(t, xp), eye, x - model.transition(t, xp), q_inv);
    }
    const auto nc = static_cast<Index>(cons.ineq_dim(t));
    if (nc > 0) {
      const Vector r = cons.inequality(t, x) + split.aux(t) + s1 * split.ineq_mult(t);
      ne.add(t, cons.inequality_jacobian(t, x), r, rho1 * Matrix::Identity(nc, nc));
    }
    const auto nq = static_cast<Index>(cons.eq_dim(t));
    if (nq > 0) {
      const Vector r = cons.equality(t, x) + s2 * split.eq_mult(t);
      ne.add(t, cons.equality_jacobian(t, x), r, rho2 * Matrix::Identity(nq, nq));
    }
  }
  return ne;
}

Vector stack_ineq(const ConstraintSet& cons, const Trajectory& x) {
  std::vector<double> out;
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    const Vector c = cons.inequality(t, x[t]);
    out.insert(out.end(), c.data(), c.data() + c.size());
  }
  return Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size()));
}

Vector stack_eq(const ConstraintSet& cons, const Trajectory& x) {
  std::vector<double> out;
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    const Vector e = cons.equality(t, x[t]);
    out.insert(out.end(), e.data(), e.data() + e.size());
  }
  return Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size()));
}

SplitState unstack(const ConstraintSet& cons, const SplitParams& params, const Vector& aux,
                   const Vector& eta, const Vector& zeta) {
  SplitState state(cons, params);
  Index ic = 0;
  Index ie = 0;
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    const auto nc = static_cast<Index>(cons.ineq_dim(t));
    const auto nq = static_cast<Index>(cons.eq_dim(t));
    if (nc > 0) {
      state.set_aux(t, aux.segment(ic, nc));
      state.set_ineq_mult(t, eta.segment(ic, nc));
    }
    if (nq > 0) state.set_eq_mult(t, zeta.segment(ie, nq));
    ic += nc;
    ie += nq;
  }
  return state;
}

}  // namespace

std::size_t dense_bytes(std::size_t steps, std::size_t state_dim) noexcept {
  const std::size_t n = steps * state_dim;
  return n * n * sizeof(double);
}

Vector batch_theta_grad(const NonlinearModel& model, const Trajectory& traj,
                        const MeasurementSequence& meas) {
  check_consistent(model, traj, meas);
  const auto nx = static_cast<Index>(model.state_dim());
  Vector grad = Vector::Zero(static_cast<Index>(model.steps()) * nx);
  const auto seg = [&](std::size_t t) { return grad.segment(static_cast<Index>(t) * nx, nx); };
  seg(0) += inverse_of(model.prior_cov()) * (traj[0] - model.prior_mean());
  for (std::size_t t = 0; t < model.steps(); ++t) {
    const Vector x = traj[t];
    const Vector r = model.measurement(t, x) - meas[t];
    seg(t) += model.measurement_jacobian(t, x).transpose() * (inverse_of(model.meas_cov(t)) * r);
    if (t > 0) {
      const Vector xp = traj[t - 1];
      const Vector w = inverse_of(model.process_cov(t)) * (x - model.transition(t, xp));
      seg(t) += w;
      seg(t - 1) -= model.transition_jacobian(t, xp).transpose() * w;
    }
  }
  if (!grad.allFinite()) throw NumericError("batch_theta_grad: non-finite gradient");
  return grad;
}

DenseSystem batch_qp_system(const AffineModel& aff, const SplitState& split,
                            const MeasurementSequence& meas, PenaltyScaling scaling,
                            const BatchOptions& opts) {
  const std::size_t steps = aff.steps();
  const std::size_t nx = aff.state_dim();
  if (split.steps() != steps) throw ContractError("batch_qp_system: split state step mismatch");
  if (meas.steps() != steps || meas.dim() != aff.meas_dim()) {
    throw ContractError("batch_qp_system: measurement shape mismatch");
  }
  NormalEquations ne(steps, nx, opts);
  const Matrix eye = Matrix::Identity(static_cast<Index>(nx), static_cast<Index>(nx));
  const double rho1 = split.params().rho1;
  const double rho2 = split.params().rho2;
  const double s1 = ineq_shift_scale(split, scaling);
  const double s2 = eq_shift_scale(split, scaling);

  // Residuals evaluated at the zero trajectory; every block is affine, so the
  // Newton step from zero lands on the minimizer.
  ne.add(0, eye, -aff.prior_mean(), inverse_of(aff.prior_cov()));
  for (std::size_t t = 0; t < steps; ++t) {
    const AffineStep& s = aff.step(t);
    ne.add(t, s.H, s.g - meas[t], inverse_of(aff.meas_cov(t)));
    if (t > 0) ne.add_pair(t, -s.A, eye, -s.b, inverse_of(aff.process_cov(t)));
    if (s.C.rows() > 0) {
      if (split.ineq_dim(t) != static_cast<std::size_t>(s.C.rows())) {
        throw ContractError("batch_qp_system: split state does not match constraint rows");
      }
      ne.add(t, s.C, s.d + split.aux(t) + s1 * split.ineq_mult(t),
             rho1 * Matrix::Identity(s.C.rows(), s.C.rows()));
    }
    if (s.E.rows() > 0) {
      if (split.eq_dim(t) != static_cast<std::size_t>(s.E.rows())) {
        throw ContractError("batch_qp_system: split state does not match constraint rows");
      }
      ne.add(t, s.E, s.f + s2 * split.eq_mult(t),
             rho2 * Matrix::Identity(s.E.rows(), s.E.rows()));
    }
  }
  return {std::move(ne.hessian()), -ne.grad()};
}

Vector batch_qp_gradient(const AffineModel& aff, const SplitState& split,
                         const MeasurementSequence& meas, const Trajectory& traj,
                         PenaltyScaling scaling) {
  const auto nx = static_cast<Index>(aff.state_dim());
  if (traj.steps() != aff.steps() || traj.dim() != aff.state_dim()) {
    throw ContractError("batch_qp_gradient: trajectory shape mismatch");
  }
  const double rho1 = split.params().rho1;
  const double rho2 = split.params().rho2;
  const double s1 = ineq_shift_scale(split, scaling);
  const double s2 = eq_shift_scale(split, scaling);
  Vector grad = Vector::Zero(static_cast<Index>(aff.steps()) * nx);
  const auto seg = [&](std::size_t t) { return grad.segment(static_cast<Index>(t) * nx, nx); };
  seg(0) += inverse_of(aff.prior_cov()) * (traj[0] - aff.prior_mean());
  for (std::size_t t = 0; t < aff.steps(); ++t) {
    const AffineStep& s = aff.step(t);
    const Vector x = traj[t];
    seg(t) += s.H.transpose() * (inverse_of(aff.meas_cov(t)) * (s.H * x + s.g - meas[t]));
    if (t > 0) {
      const Vector w = inverse_of(aff.process_cov(t)) * (x - s.A * traj[t - 1] - s.b);
      seg(t) += w;
      seg(t - 1) -= s.A.transpose() * w;
    }
    if (s.C.rows() > 0) {
      seg(t) += rho1 * s.C.transpose() * (s.C * x + s.d + split.aux(t) + s1 * split.ineq_mult(t));
    }
    if (s.E.rows() > 0) {
      seg(t) += rho2 * s.E.transpose() * (s.E * x + s.f + s2 * split.eq_mult(t));
    }
  }
  return grad;
}

Trajectory batch_qp_solve(const AffineModel& aff, const SplitState& split,
                          const MeasurementSequence& meas, PenaltyScaling scaling,
                          const BatchOptions& opts) {
  DenseSystem sys = batch_qp_system(aff, split, meas, scaling, opts);
  Eigen::LLT<Eigen::Ref<Matrix>> llt(sys.hessian);
  if (llt.info() != Eigen::Success) {
    throw NumericError("batch_qp_solve: normal matrix is not positive definite");
  }
  const Vector x = llt.solve(sys.rhs);
  return unflatten(x, aff.steps(), aff.state_dim());
}

GaussNewtonResult batch_gauss_newton(const NonlinearModel& model, const ConstraintSet& cons,
                                     const SplitState& split, const Trajectory& init,
                                     const MeasurementSequence& meas, const InnerOptions& inner,
                                     PenaltyScaling scaling, const BatchOptions& opts) {
  inner.validate();
  check_consistent(model, init, meas);
  check_consistent(cons, init);
  if (split.steps() != model.steps()) throw ContractError("batch_gauss_newton: split mismatch");
  GaussNewtonResult out;
  out.x = init;
  for (std::size_t i = 0; i < inner.max_inner; ++i) {
    Vector step;
    try {
      NormalEquations ne = linearized_system(model, cons, split, out.x, meas, scaling, opts);
      step = dense_newton_step(ne);
    } catch (const NumericError& e) {
      throw DivergenceError(std::string("batch_gauss_newton: ") + e.what(), i + 1);
    }
    if (!step.allFinite()) throw DivergenceError("batch_gauss_newton: non-finite iterate", i + 1);
    Trajectory next = unflatten(flatten(out.x) + step, model.steps(), model.state_dim());
    const double moved = next.max_abs_diff(out.x);
    out.x = std::move(next);
    out.iterations = i + 1;
    if (inner.record_iterates) out.iterates.push_back(out.x);
    if (moved <= inner.tol_inner) {
      out.converged = true;
      break;
    }
  }
  return out;
}

BatchSplitResult batch_split_solve(const NonlinearModel& model, const ConstraintSet& cons,
                                   const MeasurementSequence& meas, const SolveOptions& opts,
                                   const BatchOptions& batch) {
  using Clock = std::chrono::steady_clock;
  opts.validate();
  if (cons.steps() != model.steps()) throw ContractError("batch_split_solve: step mismatch");
  const auto start = Clock::now();
  const SplitParams& prm = opts.params;
  const bool affine = model.affine() && cons.affine();
  InnerOptions inner = opts.inner;
  inner.record_iterates = false;
  if (affine) inner.max_inner = 1;

  const auto x_update = [&](const ConstraintSet& cs, const SplitState& st, PenaltyScaling sc,
                            const Trajectory& warm) {
    return batch_gauss_newton(model, cs, st, warm, meas, inner, sc, batch).x;
  };

  BatchSplitResult out;
  if (opts.init) {
    out.init = *opts.init;
  } else {
    Trajectory rollout(model.steps(), model.state_dim());
    rollout[0] = model.prior_mean();
    for (std::size_t t = 1; t < model.steps(); ++t) rollout[t] = model.transition(t, rollout[t - 1]);
    const ConstraintSet none = ConstraintSet::none(model.steps(), model.state_dim());
    out.init = x_update(none, SplitState(none, prm), PenaltyScaling::Scaled, rollout);
  }
  Trajectory x = out.init;

  Vector eta = Vector::Zero(stack_ineq(cons, x).size());
  Vector aux = (-stack_ineq(cons, x)).cwiseMax(0.0);
  Vector zeta = Vector::Zero(stack_eq(cons, x).size());

  for (std::size_t k = 1; k <= opts.max_outer; ++k) {
    const Trajectory prev = x;
    switch (opts.method) {
      case Method::Admm: {
        x = x_update(cons, unstack(cons, prm, aux, eta, zeta), PenaltyScaling::Scaled, x);
        const Vector c = stack_ineq(cons, x);
        const Vector e = stack_eq(cons, x);
        aux = (-c - eta / prm.rho1).cwiseMax(0.0);
        eta += prm.rho1 * (c + aux);
        zeta += prm.rho2 * e;
        break;
      }
      case Method::Prs: {
        x = x_update(cons, unstack(cons, prm, aux, eta, zeta), PenaltyScaling::Scaled, x);
        const Vector c = stack_ineq(cons, x);
        const Vector e = stack_eq(cons, x);
        const Vector eta_half = eta + prm.alpha1 * prm.rho1 * (c + aux);
        const Vector zeta_half = zeta + prm.alpha2 * prm.rho2 * e;
        aux = (-c - (prm.prs_half_step_aux ? eta_half : eta) / prm.rho1).cwiseMax(0.0);
        eta = eta_half + prm.alpha1 * prm.rho1 * (c + aux);
        zeta = zeta_half + prm.alpha2 * prm.rho2 * e;
        break;
      }
      case Method::Sbm: {
        for (std::size_t j = 0; j < prm.sbm_inner; ++j) {
          x = x_update(cons, unstack(cons, prm, aux, eta, zeta), PenaltyScaling::Unscaled, x);
          aux = (-stack_ineq(cons, x) - eta).cwiseMax(0.0);
        }
        eta += stack_ineq(cons, x) + aux;
        zeta += stack_eq(cons, x);
        break;
      }
    }
    const double step = x.max_abs_diff(prev);
    const Violation viol = eval_violation(cons, x);
    out.trace.push(eval_theta(model, x, meas), viol, step,
                   std::chrono::duration<double>(Clock::now() - start).count());
    if (opts.record_iterates) out.iterates.push_back({x, aux, eta, zeta});
    if (step <= opts.tol_step && viol.max() <= opts.tol_violation) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace csmooth::oracle
