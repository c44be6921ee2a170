#include "csmooth/cks.hpp"

#include <string>

namespace csmooth {
namespace {

using Index = Eigen::Index;

void require(bool ok, const std::string& what, std::size_t t) {
  if (!ok) throw ContractError("AffineModel: " + what + " at step " + std::to_string(t));
}

// Joseph-form update of (m, P) with the observation obs = Hm + off + noise,
// noise ~ N(0, noise_cov).
void joseph_update(Vector& m, Matrix& p, const Matrix& h, const Vector& off, const Vector& obs,
                   const Matrix& noise_cov, std::size_t t) {
  if (h.rows() == 0) return;
  const Matrix hp = h * p;
  Matrix s = hp * h.transpose() + noise_cov;
  symmetrize(s);
  const Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericError("kalman_filter: innovation covariance not positive definite at step " +
                       std::to_string(t));
  }
  const Matrix gain = llt.solve(hp).transpose();
  m += gain * (obs - h * m - off);
  Matrix ikh = -gain * h;
  ikh.diagonal().array() += 1.0;
  p = ikh * p * ikh.transpose() + gain * noise_cov * gain.transpose();
  symmetrize(p);
  if (!m.allFinite() || !p.allFinite()) {
    throw NumericError("kalman_filter: non-finite moments at step " + std::to_string(t));
  }
}

}  // namespace

AffineModel::AffineModel(std::vector<AffineStep> steps, PerStep<Matrix> process_cov,
                         PerStep<Matrix> meas_cov, Vector prior_mean, Matrix prior_cov)
    : steps_(std::move(steps)),
      process_cov_(std::move(process_cov)),
      meas_cov_(std::move(meas_cov)),
      prior_mean_(std::move(prior_mean)),
      prior_cov_(std::move(prior_cov)) {
  if (steps_.empty()) throw ContractError("AffineModel: need at least one step");
  const Index nx = prior_mean_.size();
  if (nx < 1 || prior_cov_.rows() != nx || prior_cov_.cols() != nx) {
    throw ContractError("AffineModel: prior has inconsistent shape");
  }
  if (!process_cov_.covers(steps_.size()) || !meas_cov_.covers(steps_.size())) {
    throw ContractError("AffineModel: need one covariance or one per step");
  }
  const Index ny = steps_.front().H.rows();
  if (ny < 1) throw ContractError("AffineModel: measurement dimension must be positive");
  meas_dim_ = static_cast<std::size_t>(ny);
  for (std::size_t t = 0; t < steps_.size(); ++t) {
    const AffineStep& s = steps_[t];
    if (t > 0) {
      require(s.A.rows() == nx && s.A.cols() == nx && s.b.size() == nx, "transition shape", t);
      require(process_cov_[t].rows() == nx && process_cov_[t].cols() == nx,
              "process covariance shape", t);
    }
    require(s.H.rows() == ny && s.H.cols() == nx && s.g.size() == ny, "measurement shape", t);
    require(meas_cov_[t].rows() == ny && meas_cov_[t].cols() == ny,
            "measurement covariance shape", t);
    require(s.C.cols() == nx && s.d.size() == s.C.rows(), "inequality block shape", t);
    require(s.E.cols() == nx && s.f.size() == s.E.rows(), "equality block shape", t);
  }
}

std::shared_ptr<const std::vector<AffineStep>> AffineModel::shared_steps() const {
  return std::make_shared<const std::vector<AffineStep>>(steps_);
}

NonlinearModel AffineModel::as_model() const {
  auto s = shared_steps();
  NonlinearModel::Definition def;
  def.steps = steps();
  def.state_dim = state_dim();
  def.meas_dim = meas_dim();
  def.transition = [s](std::size_t t, const Vector& x) -> Vector {
    return (*s)[t].A * x + (*s)[t].b;
  };
  def.transition_jacobian = [s](std::size_t t, const Vector&) -> Matrix { return (*s)[t].A; };
  def.measurement = [s](std::size_t t, const Vector& x) -> Vector {
    return (*s)[t].H * x + (*s)[t].g;
  };
  def.measurement_jacobian = [s](std::size_t t, const Vector&) -> Matrix { return (*s)[t].H; };
  def.process_cov = process_cov_;
  def.meas_cov = meas_cov_;
  def.prior_mean = prior_mean_;
  def.prior_cov = prior_cov_;
  def.affine = true;
  return NonlinearModel(std::move(def));
}

ConstraintSet AffineModel::as_constraints() const {
  auto s = shared_steps();
  ConstraintSet::Definition def;
  def.steps = steps();
  def.state_dim = state_dim();
  std::vector<std::size_t> eq_dims;
  std::vector<std::size_t> ineq_dims;
  for (const auto& step : steps_) {
    eq_dims.push_back(static_cast<std::size_t>(step.E.rows()));
    ineq_dims.push_back(static_cast<std::size_t>(step.C.rows()));
  }
  def.eq_dims = PerStep<std::size_t>(std::move(eq_dims));
  def.ineq_dims = PerStep<std::size_t>(std::move(ineq_dims));
  def.equality = [s](std::size_t t, const Vector& x) -> Vector {
    return (*s)[t].E * x + (*s)[t].f;
  };
  def.equality_jacobian = [s](std::size_t t, const Vector&) -> Matrix { return (*s)[t].E; };
  def.inequality = [s](std::size_t t, const Vector& x) -> Vector {
    return (*s)[t].C * x + (*s)[t].d;
  };
  def.inequality_jacobian = [s](std::size_t t, const Vector&) -> Matrix { return (*s)[t].C; };
  def.affine = true;
  return ConstraintSet(std::move(def));
}

PseudoMeasurements build_pseudo(const SplitState& split, PenaltyScaling scaling) {
  const SplitParams& prm = split.params();
  PseudoMeasurements out;
  out.ineq_obs.reserve(split.steps());
  out.eq_obs.reserve(split.steps());
  bool any_ineq = false;
  bool any_eq = false;
  for (std::size_t t = 0; t < split.steps(); ++t) {
    any_ineq = any_ineq || split.ineq_dim(t) > 0;
    any_eq = any_eq || split.eq_dim(t) > 0;
  }
  if (any_ineq && !(prm.rho1 > 0.0)) throw ContractError("build_pseudo: rho1 must be positive");
  if (any_eq && !(prm.rho2 > 0.0)) throw ContractError("build_pseudo: rho2 must be positive");
  const bool scaled = scaling == PenaltyScaling::Scaled;
  const double eta_scale = scaled && any_ineq ? 1.0 / prm.rho1 : 1.0;
  const double zeta_scale = scaled && any_eq ? 1.0 / prm.rho2 : 1.0;
  for (std::size_t t = 0; t < split.steps(); ++t) {
    out.ineq_obs.push_back(-split.aux(t) - eta_scale * split.ineq_mult(t));
    out.eq_obs.push_back(-zeta_scale * split.eq_mult(t));
  }
  out.ineq_var = any_ineq ? 1.0 / prm.rho1 : 1.0;
  out.eq_var = any_eq ? 1.0 / prm.rho2 : 1.0;
  return out;
}

FilterResult kalman_filter(const AffineModel& aff, const PseudoMeasurements& pseudo,
                           const MeasurementSequence& meas, FilterOptions opts) {
  const std::size_t steps = aff.steps();
  const std::size_t nx = aff.state_dim();
  if (meas.steps() != steps || meas.dim() != aff.meas_dim()) {
    throw ContractError("kalman_filter: measurement sequence shape does not match the model");
  }
  if (pseudo.ineq_obs.size() != steps || pseudo.eq_obs.size() != steps) {
    throw ContractError("kalman_filter: pseudo-measurement count does not match the model");
  }

  FilterResult out{Trajectory(steps, nx), {}, Trajectory(steps, nx), {}};
  out.cov.reserve(steps);
  out.pred_cov.reserve(steps);

  Vector m = aff.prior_mean();
  Matrix p = aff.prior_cov();
  for (std::size_t t = 0; t < steps; ++t) {
    const AffineStep& s = aff.step(t);
    if (s.C.rows() != pseudo.ineq_obs[t].size() || s.E.rows() != pseudo.eq_obs[t].size()) {
      throw ContractError("kalman_filter: pseudo-measurement size mismatch at step " +
                          std::to_string(t));
    }
    if (t > 0) {
      m = s.A * m + s.b;
      p = s.A * p * s.A.transpose() + aff.process_cov(t);
      symmetrize(p);
    }
    out.pred_mean[t] = m;
    out.pred_cov.push_back(p);

    if (opts.stacked_update) {
      const Index ny = s.H.rows(), nc = s.C.rows(), ne = s.E.rows();
      const Index rows = ny + nc + ne;
      Matrix h(rows, static_cast<Index>(nx));
      h << s.H, s.C, s.E;
      Vector off(rows), obs(rows);
      off << s.g, s.d, s.f;
      obs << meas[t], pseudo.ineq_obs[t], pseudo.eq_obs[t];
      Matrix noise = Matrix::Zero(rows, rows);
      noise.topLeftCorner(ny, ny) = aff.meas_cov(t);
      noise.block(ny, ny, nc, nc).diagonal().setConstant(pseudo.ineq_var);
      noise.bottomRightCorner(ne, ne).diagonal().setConstant(pseudo.eq_var);
      joseph_update(m, p, h, off, obs, noise, t);
    } else {
      joseph_update(m, p, s.H, s.g, meas[t], aff.meas_cov(t), t);
      joseph_update(m, p, s.C, s.d, pseudo.ineq_obs[t], pseudo.ineq_cov(t), t);
      joseph_update(m, p, s.E, s.f, pseudo.eq_obs[t], pseudo.eq_cov(t), t);
    }
    out.mean[t] = m;
    out.cov.push_back(p);
  }
  return out;
}

SmootherOutput rts_smooth(FilterResult filtered, const AffineModel& aff, bool with_covariances) {
  const std::size_t steps = filtered.mean.steps();
  if (steps != aff.steps() || filtered.cov.size() != steps || filtered.pred_cov.size() != steps) {
    throw ContractError("rts_smooth: filter output does not match the model");
  }
  SmootherOutput out;
  out.mean = filtered.mean;
  if (with_covariances) out.cov = filtered.cov;

  for (std::size_t k = steps - 1; k-- > 0;) {
    const Matrix& a = aff.step(k + 1).A;
    const Matrix& pf = filtered.cov[k];
    const Eigen::LLT<Matrix> llt(filtered.pred_cov[k + 1]);
    if (llt.info() != Eigen::Success) {
      throw NumericError("rts_smooth: singular predicted covariance at step " +
                         std::to_string(k + 1));
    }
    // G = Pf A^T Ppred^{-1}
    const Matrix gain = llt.solve(a * pf).transpose();
    out.mean[k] = filtered.mean[k] + gain * (out.mean[k + 1] - filtered.pred_mean[k + 1]);
    if (with_covariances) {
      Matrix pk = pf + gain * (out.cov[k + 1] - filtered.pred_cov[k + 1]) * gain.transpose();
      symmetrize(pk);
      out.cov[k] = std::move(pk);
    }
  }
  if (!out.mean.all_finite()) throw NumericError("rts_smooth: non-finite smoothed mean");
  out.filtered = std::move(filtered);
  return out;
}

Trajectory cks_solve(const AffineModel& aff, const SplitState& split,
                     const MeasurementSequence& meas, PenaltyScaling scaling) {
  if (split.steps() != aff.steps()) throw ContractError("cks_solve: split state step mismatch");
  auto smoothed = rts_smooth(kalman_filter(aff, build_pseudo(split, scaling), meas), aff, false);
  return std::move(smoothed.mean);
}

}  // namespace csmooth
