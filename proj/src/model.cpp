#include "csmooth/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csmooth {
namespace {

Eigen::LLT<Matrix> factor_spd(const Matrix& m, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
    throw ContractError(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                        std::to_string(dim));
  }
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ContractError(std::string(what) + ": not symmetric");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw ContractError(std::string(what) + ": not positive definite");
  }
  return llt;
}

PerStep<Eigen::LLT<Matrix>> factor_all(const PerStep<Matrix>& covs, std::size_t steps,
                                       std::size_t dim, const char* what) {
  if (!covs.covers(steps)) {
    throw ContractError(std::string(what) + ": need one matrix or one per step");
  }
  if (covs.shared()) return PerStep<Eigen::LLT<Matrix>>(factor_spd(covs[0], dim, what));
  std::vector<Eigen::LLT<Matrix>> out;
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) out.push_back(factor_spd(covs[t], dim, what));
  return PerStep<Eigen::LLT<Matrix>>(std::move(out));
}

Vector checked(Vector v, std::size_t dim, const char* what, std::size_t t) {
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw ContractError(std::string(what) + " at step " + std::to_string(t) + " returned size " +
                        std::to_string(v.size()) + ", expected " + std::to_string(dim));
  }
  return v;
}

Matrix checked(Matrix m, std::size_t rows, std::size_t cols, const char* what, std::size_t t) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw ContractError(std::string(what) + " at step " + std::to_string(t) +
                        " has wrong shape");
  }
  return m;
}

// 1/2 r^T S^{-1} r via the Cholesky factor S = L L^T.
double half_quad(const Eigen::LLT<Matrix>& chol, const Vector& r) {
  const Vector w = chol.matrixL().solve(r);
  return 0.5 * w.squaredNorm();
}

}  // namespace

Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                            double h) {
  if (!(h > 0.0)) throw ContractError("finite_diff_jacobian: step must be positive");
  Vector xp = x;
  Matrix jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    const Vector fp = f(xp);
    xp(j) = x(j) - h;
    const Vector fm = f(xp);
    xp(j) = x(j);
    if (j == 0) jac.resize(fp.size(), x.size());
    if (!fp.allFinite() || !fm.allFinite()) {
      throw NumericError("finite_diff_jacobian: non-finite function value");
    }
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x) {
  Vector xp = x;
  Matrix jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    const Vector fp = f(xp);
    xp(j) = x(j) - h;
    const Vector fm = f(xp);
    xp(j) = x(j);
    if (j == 0) jac.resize(fp.size(), x.size());
    if (!fp.allFinite() || !fm.allFinite()) {
      throw NumericError("finite_diff_jacobian: non-finite function value");
    }
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// NonlinearModel

NonlinearModel::NonlinearModel(Definition def) : def_(std::move(def)) {
  if (def_.steps < 1) throw ContractError("NonlinearModel: need at least one step");
  if (def_.state_dim < 1 || def_.meas_dim < 1) {
    throw ContractError("NonlinearModel: dimensions must be positive");
  }
  if (!def_.transition || !def_.measurement) {
    throw ContractError("NonlinearModel: transition and measurement functions are required");
  }
  if (static_cast<std::size_t>(def_.prior_mean.size()) != def_.state_dim) {
    throw ContractError("NonlinearModel: prior mean has wrong size");
  }
  process_chol_ = factor_all(def_.process_cov, def_.steps, def_.state_dim, "process covariance");
  meas_chol_ = factor_all(def_.meas_cov, def_.steps, def_.meas_dim, "measurement covariance");
  prior_chol_ = factor_spd(def_.prior_cov, def_.state_dim, "prior covariance");
}

NonlinearModel NonlinearModel::time_invariant(
    std::size_t steps, std::function<Vector(const Vector&)> transition,
    std::function<Vector(const Vector&)> measurement, Matrix process_cov, Matrix meas_cov,
    Vector prior_mean, Matrix prior_cov, std::function<Matrix(const Vector&)> transition_jacobian,
    std::function<Matrix(const Vector&)> measurement_jacobian) {
  Definition def;
  def.steps = steps;
  def.state_dim = static_cast<std::size_t>(prior_mean.size());
  def.meas_dim = static_cast<std::size_t>(meas_cov.rows());
  def.transition = [a = std::move(transition)](std::size_t, const Vector& x) { return a(x); };
  def.measurement = [h = std::move(measurement)](std::size_t, const Vector& x) { return h(x); };
  if (transition_jacobian) {
    def.transition_jacobian = [j = std::move(transition_jacobian)](std::size_t, const Vector& x) {
      return j(x);
    };
  }
  if (measurement_jacobian) {
    def.measurement_jacobian = [j = std::move(measurement_jacobian)](std::size_t, const Vector& x) {
      return j(x);
    };
  }
  def.process_cov = PerStep<Matrix>(std::move(process_cov));
  def.meas_cov = PerStep<Matrix>(std::move(meas_cov));
  def.prior_mean = std::move(prior_mean);
  def.prior_cov = std::move(prior_cov);
  return NonlinearModel(std::move(def));
}

Vector NonlinearModel::transition(std::size_t t, const Vector& x_prev) const {
  return checked(def_.transition(t, x_prev), def_.state_dim, "transition", t);
}

Matrix NonlinearModel::transition_jacobian(std::size_t t, const Vector& x_prev) const {
  if (!def_.transition_jacobian) return transition_jacobian_fd(t, x_prev);
  return checked(def_.transition_jacobian(t, x_prev), def_.state_dim, def_.state_dim,
                 "transition jacobian", t);
}

Matrix NonlinearModel::transition_jacobian_fd(std::size_t t, const Vector& x_prev) const {
  return finite_diff_jacobian([&](const Vector& x) { return transition(t, x); }, x_prev);
}

Vector NonlinearModel::measurement(std::size_t t, const Vector& x) const {
  return checked(def_.measurement(t, x), def_.meas_dim, "measurement", t);
}

Matrix NonlinearModel::measurement_jacobian(std::size_t t, const Vector& x) const {
  if (!def_.measurement_jacobian) return measurement_jacobian_fd(t, x);
  return checked(def_.measurement_jacobian(t, x), def_.meas_dim, def_.state_dim,
                 "measurement jacobian", t);
}

Matrix NonlinearModel::measurement_jacobian_fd(std::size_t t, const Vector& x) const {
  return finite_diff_jacobian([&](const Vector& z) { return measurement(t, z); }, x);
}

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet::ConstraintSet(Definition def) : def_(std::move(def)) {
  if (def_.steps < 1 || def_.state_dim < 1) {
    throw ContractError("ConstraintSet: steps and state dimension must be positive");
  }
  if (!def_.eq_dims.covers(def_.steps) || !def_.ineq_dims.covers(def_.steps)) {
    throw ContractError("ConstraintSet: need one dimension or one per step");
  }
  for (std::size_t t = 0; t < def_.steps; ++t) {
    has_eq_ = has_eq_ || def_.eq_dims[t] > 0;
    has_ineq_ = has_ineq_ || def_.ineq_dims[t] > 0;
    if (has_eq_ && has_ineq_) break;
  }
  if (has_eq_ && !def_.equality) throw ContractError("ConstraintSet: missing equality function");
  if (has_ineq_ && !def_.inequality) {
    throw ContractError("ConstraintSet: missing inequality function");
  }
}

ConstraintSet ConstraintSet::none(std::size_t steps, std::size_t state_dim) {
  Definition def;
  def.steps = steps;
  def.state_dim = state_dim;
  def.affine = true;
  return ConstraintSet(std::move(def));
}

Vector ConstraintSet::equality(std::size_t t, const Vector& x) const {
  const std::size_t n = def_.eq_dims[t];
  if (n == 0) return Vector(0);
  return checked(def_.equality(t, x), n, "equality constraint", t);
}

Matrix ConstraintSet::equality_jacobian(std::size_t t, const Vector& x) const {
  const std::size_t n = def_.eq_dims[t];
  if (n == 0) return Matrix(0, static_cast<Eigen::Index>(def_.state_dim));
  if (!def_.equality_jacobian) return equality_jacobian_fd(t, x);
  return checked(def_.equality_jacobian(t, x), n, def_.state_dim, "equality jacobian", t);
}

Matrix ConstraintSet::equality_jacobian_fd(std::size_t t, const Vector& x) const {
  if (def_.eq_dims[t] == 0) return Matrix(0, static_cast<Eigen::Index>(def_.state_dim));
  return finite_diff_jacobian([&](const Vector& z) { return equality(t, z); }, x);
}

Vector ConstraintSet::inequality(std::size_t t, const Vector& x) const {
  const std::size_t n = def_.ineq_dims[t];
  if (n == 0) return Vector(0);
  return checked(def_.inequality(t, x), n, "inequality constraint", t);
}

Matrix ConstraintSet::inequality_jacobian(std::size_t t, const Vector& x) const {
  const std::size_t n = def_.ineq_dims[t];
  if (n == 0) return Matrix(0, static_cast<Eigen::Index>(def_.state_dim));
  if (!def_.inequality_jacobian) return inequality_jacobian_fd(t, x);
  return checked(def_.inequality_jacobian(t, x), n, def_.state_dim, "inequality jacobian", t);
}

Matrix ConstraintSet::inequality_jacobian_fd(std::size_t t, const Vector& x) const {
  if (def_.ineq_dims[t] == 0) return Matrix(0, static_cast<Eigen::Index>(def_.state_dim));
  return finite_diff_jacobian([&](const Vector& z) { return inequality(t, z); }, x);
}

// ---------------------------------------------------------------------------
// Evaluation

void check_consistent(const NonlinearModel& model, const Trajectory& traj,
                      const MeasurementSequence& meas) {
  if (traj.steps() != model.steps() || traj.dim() != model.state_dim()) {
    throw ContractError("trajectory shape does not match the model");
  }
  if (meas.steps() != model.steps() || meas.dim() != model.meas_dim()) {
    throw ContractError("measurement sequence shape does not match the model");
  }
}

void check_consistent(const ConstraintSet& cons, const Trajectory& traj) {
  if (traj.steps() != cons.steps() || traj.dim() != cons.state_dim()) {
    throw ContractError("trajectory shape does not match the constraint set");
  }
}

std::vector<double> theta_step_terms(const NonlinearModel& model, const Trajectory& traj,
                                     const MeasurementSequence& meas) {
  check_consistent(model, traj, meas);
  const std::size_t steps = model.steps();
  std::vector<double> terms(steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const Vector x = traj[t];
    double term = half_quad(model.meas_chol(t), meas[t] - model.measurement(t, x));
    if (t == 0) {
      term += half_quad(model.prior_chol(), x - model.prior_mean());
    } else {
      term += half_quad(model.process_chol(t), x - model.transition(t, traj[t - 1]));
    }
    if (!std::isfinite(term)) {
      throw NumericError("eval_theta: non-finite term at step " + std::to_string(t));
    }
    terms[t] = term;
  }
  return terms;
}

ThetaBreakdown theta_breakdown(const NonlinearModel& model, const Trajectory& traj,
                               const MeasurementSequence& meas) {
  check_consistent(model, traj, meas);
  ThetaBreakdown out;
  out.prior = half_quad(model.prior_chol(), traj[0] - model.prior_mean());
  for (std::size_t t = 0; t < model.steps(); ++t) {
    out.measurement += half_quad(model.meas_chol(t), meas[t] - model.measurement(t, traj[t]));
    if (t > 0) {
      out.transition += half_quad(model.process_chol(t), traj[t] - model.transition(t, traj[t - 1]));
    }
  }
  if (!std::isfinite(out.total())) throw NumericError("eval_theta: non-finite value");
  return out;
}

double eval_theta(const NonlinearModel& model, const Trajectory& traj,
                  const MeasurementSequence& meas) {
  const auto terms = theta_step_terms(model, traj, meas);
  double sum = 0.0;
  for (double v : terms) sum += v;
  return sum;
}

Violation eval_violation(const ConstraintSet& cons, const Trajectory& traj) {
  check_consistent(cons, traj);
  Violation out;
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    if (cons.ineq_dim(t) > 0) {
      const Vector c = cons.inequality(t, traj[t]);
      out.max_ineq = std::max(out.max_ineq, c.maxCoeff());
    }
    if (cons.eq_dim(t) > 0) {
      const Vector e = cons.equality(t, traj[t]);
      out.max_eq = std::max(out.max_eq, e.cwiseAbs().maxCoeff());
    }
  }
  return out;
}

JacobianReport validate_jacobians(const NonlinearModel& model, const ConstraintSet& cons,
                                  const Trajectory& center, double spread, std::size_t samples,
                                  std::mt19937_64& rng, double rel_tol) {
  check_consistent(cons, center);
  if (center.steps() != model.steps()) throw ContractError("validate_jacobians: step mismatch");
  std::normal_distribution<double> noise(0.0, spread);
  std::uniform_int_distribution<std::size_t> pick(0, model.steps() - 1);
  JacobianReport report;
  const auto record = [&](const Matrix& analytic, const Matrix& fd) {
    if (fd.size() == 0) return;
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    report.max_rel_error =
        std::max(report.max_rel_error, (analytic - fd).cwiseAbs().maxCoeff() / scale);
  };
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t t = pick(rng);
    Vector x = center[t];
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += noise(rng);
    if (t > 0) record(model.transition_jacobian(t, x), model.transition_jacobian_fd(t, x));
    record(model.measurement_jacobian(t, x), model.measurement_jacobian_fd(t, x));
    record(cons.equality_jacobian(t, x), cons.equality_jacobian_fd(t, x));
    record(cons.inequality_jacobian(t, x), cons.inequality_jacobian_fd(t, x));
  }
  report.ok = report.max_rel_error <= rel_tol;
  return report;
}

Trajectory prior_rollout(const NonlinearModel& model) {
  Trajectory out(model.steps(), model.state_dim());
  out[0] = model.prior_mean();
  for (std::size_t t = 1; t < model.steps(); ++t) {
    out[t] = model.transition(t, out[t - 1]);
  }
  return out;
}

}  // namespace csmooth
