#include "csmooth/split_state.hpp"

#include <algorithm>
#include <limits>

namespace csmooth {

void SplitParams::validate() const {
  if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw ContractError("SplitParams: penalties must be positive");
  if (!(alpha1 > 0.0 && alpha1 < 1.0) || !(alpha2 > 0.0 && alpha2 < 1.0)) {
    throw ContractError("SplitParams: relaxation parameters must lie in (0, 1)");
  }
  if (sbm_inner < 1) throw ContractError("SplitParams: split Bregman inner count must be >= 1");
}

SplitState::SplitState(const ConstraintSet& cons, SplitParams params) : params_(params) {
  params_.validate();
  aux_.reserve(cons.steps());
  ineq_mult_.reserve(cons.steps());
  eq_mult_.reserve(cons.steps());
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    const auto nc = static_cast<Eigen::Index>(cons.ineq_dim(t));
    const auto ne = static_cast<Eigen::Index>(cons.eq_dim(t));
    aux_.push_back(Vector::Zero(nc));
    ineq_mult_.push_back(Vector::Zero(nc));
    eq_mult_.push_back(Vector::Zero(ne));
  }
}

void SplitState::set_aux(std::size_t t, Vector v) {
  if (v.size() != aux_[t].size()) throw ContractError("SplitState: auxiliary size changed");
  if (v.size() > 0 && !(v.minCoeff() >= 0.0)) {
    throw ContractError("SplitState: auxiliary variable must be nonnegative");
  }
  aux_[t] = std::move(v);
}

void SplitState::set_ineq_mult(std::size_t t, Vector eta) {
  if (eta.size() != ineq_mult_[t].size()) throw ContractError("SplitState: multiplier size changed");
  ineq_mult_[t] = std::move(eta);
}

void SplitState::set_eq_mult(std::size_t t, Vector zeta) {
  if (zeta.size() != eq_mult_[t].size()) throw ContractError("SplitState: multiplier size changed");
  eq_mult_[t] = std::move(zeta);
}

double SplitState::min_aux() const {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& v : aux_) {
    if (v.size() > 0) out = std::min(out, v.minCoeff());
  }
  return out;
}

double SplitState::max_abs_diff(const SplitState& other) const {
  if (other.steps() != steps()) throw ContractError("SplitState: step count mismatch");
  double out = 0.0;
  const auto acc = [&out](const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ContractError("SplitState: dimension mismatch");
    if (a.size() > 0) out = std::max(out, (a - b).cwiseAbs().maxCoeff());
  };
  for (std::size_t t = 0; t < steps(); ++t) {
    acc(aux_[t], other.aux_[t]);
    acc(ineq_mult_[t], other.ineq_mult_[t]);
    acc(eq_mult_[t], other.eq_mult_[t]);
  }
  return out;
}

}  // namespace csmooth
