#include "csmooth/problems.hpp"

#include <cmath>
#include <memory>

namespace csmooth::problems {
namespace {

using Index = Eigen::Index;

Matrix randn(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

Vector randv(std::mt19937_64& rng, Index size, double scale = 1.0) {
  return randn(rng, size, 1, scale);
}

Matrix random_spd(std::mt19937_64& rng, Index n, double scale, double floor) {
  const Matrix l = randn(rng, n, n, scale);
  Matrix s = l * l.transpose();
  s.diagonal().array() += floor;
  symmetrize(s);
  return s;
}

std::size_t draw(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

SplitState random_split(std::mt19937_64& rng, const ConstraintSet& cons, const SplitParams& params) {
  SplitState split(cons, params);
  for (std::size_t t = 0; t < cons.steps(); ++t) {
    const auto nc = static_cast<Index>(cons.ineq_dim(t));
    const auto ne = static_cast<Index>(cons.eq_dim(t));
    if (nc > 0) {
      split.set_aux(t, randv(rng, nc).cwiseAbs());
      split.set_ineq_mult(t, randv(rng, nc));
    }
    if (ne > 0) split.set_eq_mult(t, randv(rng, ne));
  }
  return split;
}

Vector sample(std::mt19937_64& rng, const Matrix& cov) {
  const Eigen::LLT<Matrix> llt(cov);
  return llt.matrixL() * randv(rng, cov.rows());
}

}  // namespace

AffineInstance random_affine(std::mt19937_64& rng, const AffineSpec& spec) {
  const auto nx = static_cast<Index>(draw(rng, 1, spec.max_state_dim));
  const auto ny = static_cast<Index>(draw(rng, 1, spec.max_meas_dim));
  const Matrix q = random_spd(rng, nx, 0.3, 0.1);
  const Matrix r = random_spd(rng, ny, 0.3, 0.1);
  const Matrix p0 = random_spd(rng, nx, 0.5, 0.2);
  const Vector m0 = randv(rng, nx);

  std::vector<AffineStep> steps(spec.steps);
  MeasurementSequence meas(spec.steps, static_cast<std::size_t>(ny));
  Vector x = m0 + sample(rng, p0);
  for (std::size_t t = 0; t < spec.steps; ++t) {
    AffineStep& s = steps[t];
    if (t > 0) {
      s.A = 0.9 * Matrix::Identity(nx, nx) + randn(rng, nx, nx, 0.2);
      s.b = randv(rng, nx, 0.5);
      x = s.A * x + s.b + sample(rng, q);
    }
    s.H = randn(rng, ny, nx);
    s.g = randv(rng, ny, 0.3);
    const auto nc = static_cast<Index>(draw(rng, 0, spec.max_ineq));
    const auto ne = static_cast<Index>(draw(rng, 0, spec.max_eq));
    s.C = randn(rng, nc, nx);
    s.d = randv(rng, nc);
    s.E = randn(rng, ne, nx);
    s.f = randv(rng, ne);
    meas[t] = s.H * x + s.g + sample(rng, r);
  }
  AffineModel model(std::move(steps), PerStep<Matrix>(q), PerStep<Matrix>(r), m0, p0);
  SplitState split = random_split(rng, model.as_constraints(), spec.params);
  return {std::move(model), std::move(meas), std::move(split)};
}

NonlinearInstance random_nonlinear(std::mt19937_64& rng, std::size_t steps,
                                   std::size_t state_dim, std::size_t meas_dim,
                                   const SplitParams& params) {
  const auto nx = static_cast<Index>(state_dim);
  const auto ny = static_cast<Index>(meas_dim);
  if (ny > nx) throw ContractError("random_nonlinear: meas_dim must not exceed state_dim");

  struct Coeffs {
    Matrix a, h;
    Vector b, g, w, u;
    double d = 0.0, f = 0.0;
  };
  auto k = std::make_shared<Coeffs>();
  k->a = 0.9 * Matrix::Identity(nx, nx) + randn(rng, nx, nx, 0.15);
  k->b = randv(rng, nx, 0.2);
  k->h = randn(rng, ny, nx);
  k->g = randv(rng, ny, 0.2);
  k->w = randv(rng, nx);
  k->u = randv(rng, nx);
  k->d = std::normal_distribution<double>(0.0, 0.5)(rng);
  k->f = std::normal_distribution<double>(0.0, 0.5)(rng);

  NonlinearModel::Definition def;
  def.steps = steps;
  def.state_dim = state_dim;
  def.meas_dim = meas_dim;
  def.transition = [k](std::size_t, const Vector& x) -> Vector {
    return k->a * x + k->b + 0.1 * x.array().sin().matrix();
  };
  def.transition_jacobian = [k](std::size_t, const Vector& x) -> Matrix {
    Matrix j = k->a;
    j.diagonal() += 0.1 * x.array().cos().matrix();
    return j;
  };
  def.measurement = [k, ny](std::size_t, const Vector& x) -> Vector {
    return k->h * x + k->g + 0.05 * x.head(ny).array().square().matrix();
  };
  def.measurement_jacobian = [k, ny](std::size_t, const Vector& x) -> Matrix {
    Matrix j = k->h;
    for (Index i = 0; i < ny; ++i) j(i, i) += 0.1 * x(i);
    return j;
  };
  def.process_cov = PerStep<Matrix>(random_spd(rng, nx, 0.2, 0.05));
  def.meas_cov = PerStep<Matrix>(random_spd(rng, ny, 0.2, 0.05));
  def.prior_mean = randv(rng, nx);
  def.prior_cov = random_spd(rng, nx, 0.4, 0.2);
  NonlinearModel model(def);

  ConstraintSet::Definition cdef;
  cdef.steps = steps;
  cdef.state_dim = state_dim;
  std::vector<std::size_t> eq_dims(steps, 0);
  for (std::size_t t = 0; t < steps; t += 3) eq_dims[t] = 1;
  cdef.eq_dims = PerStep<std::size_t>(std::move(eq_dims));
  cdef.ineq_dims = PerStep<std::size_t>(std::size_t{1});
  cdef.inequality = [k](std::size_t, const Vector& x) -> Vector {
    return Vector::Constant(1, k->w.dot(x) + k->d + 0.1 * x(0) * x(0));
  };
  cdef.inequality_jacobian = [k](std::size_t, const Vector& x) -> Matrix {
    Matrix j = k->w.transpose();
    j(0, 0) += 0.2 * x(0);
    return j;
  };
  cdef.equality = [k](std::size_t, const Vector& x) -> Vector {
    return Vector::Constant(1, k->u.dot(x) + k->f + 0.05 * std::sin(x(x.size() - 1)));
  };
  cdef.equality_jacobian = [k](std::size_t, const Vector& x) -> Matrix {
    Matrix j = k->u.transpose();
    j(0, x.size() - 1) += 0.05 * std::cos(x(x.size() - 1));
    return j;
  };
  ConstraintSet cons(std::move(cdef));

  MeasurementSequence meas(steps, meas_dim);
  Vector x = model.prior_mean() + sample(rng, model.prior_cov());
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) x = model.transition(t, x) + sample(rng, model.process_cov(t));
    meas[t] = model.measurement(t, x) + sample(rng, model.meas_cov(t));
  }
  SplitState split = random_split(rng, cons, params);
  Trajectory init = prior_rollout(model);
  return {std::move(model), std::move(cons), std::move(meas), std::move(split), std::move(init)};
}

namespace {

ConstrainedAffineProblem random_tracking(std::mt19937_64& rng, std::size_t steps,
                                         std::size_t state_dim, bool with_equalities) {
  const auto nx = static_cast<Index>(state_dim);
  const double dt = 0.1;
  Matrix a = Matrix::Identity(nx, nx);
  for (Index i = 0; i + 1 < nx; ++i) a(i, i + 1) = dt;
  const Matrix q = 0.01 * Matrix::Identity(nx, nx) + random_spd(rng, nx, 0.02, 0.0);
  const Index ny = 1;
  Matrix h = Matrix::Zero(ny, nx);
  h(0, 0) = 1.0;
  const Matrix r = Matrix::Constant(1, 1, 0.25);
  const Vector m0 = randv(rng, nx);
  const Matrix p0 = Matrix::Identity(nx, nx);

  std::uniform_real_distribution<double> margin(0.0, 0.05);
  std::bernoulli_distribution eq_here(0.3);
  std::vector<AffineStep> out(steps);
  MeasurementSequence meas(steps, 1);
  Vector x = m0 + sample(rng, p0);
  bool any_eq = false;
  for (std::size_t t = 0; t < steps; ++t) {
    AffineStep& s = out[t];
    if (t > 0) {
      s.A = a;
      s.b = Vector::Zero(nx);
      x = a * x + sample(rng, q);
    }
    s.H = h;
    s.g = Vector::Zero(ny);
    Matrix c = randn(rng, 1, nx);
    c /= c.norm();
    s.C = c;
    s.d = Vector::Constant(1, -(c * x)(0) - margin(rng));
    const bool eq = with_equalities && (eq_here(rng) || (!any_eq && t + 1 == steps));
    if (eq) {
      any_eq = true;
      Matrix e = randn(rng, 1, nx);
      e /= e.norm();
      s.E = e;
      s.f = Vector::Constant(1, -(e * x)(0));
    } else {
      s.E = Matrix(0, nx);
      s.f = Vector(0);
    }
    meas[t] = h * x + sample(rng, r);
  }
  AffineModel model(std::move(out), PerStep<Matrix>(q), PerStep<Matrix>(r), m0, p0);
  return {model.as_model(), model.as_constraints(), std::move(meas)};
}

}  // namespace

ConstrainedAffineProblem random_active_inequality(std::mt19937_64& rng, std::size_t steps,
                                                  std::size_t state_dim) {
  return random_tracking(rng, steps, state_dim, false);
}

ConstrainedAffineProblem random_mixed_constraints(std::mt19937_64& rng, std::size_t steps,
                                                  std::size_t state_dim) {
  return random_tracking(rng, steps, state_dim, true);
}

}  // namespace csmooth::problems
