#pragma once

// Small hand-written problems shared by the unit tests. The frozen numbers
// used alongside them come from tests/oracles/dense_reference.py.

#include "csmooth/cks.hpp"

#include <initializer_list>

namespace fixtures {

using csmooth::Matrix;
using csmooth::Vector;

inline Matrix mat(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> v) {
  Matrix m(rows, cols);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = *it++;
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

/// T=3, Nx=2, Ny=1 with inequality rows at steps 1 and 2 and an equality row
/// at step 2.
inline csmooth::AffineModel three_step_model() {
  std::vector<csmooth::AffineStep> steps(3);
  for (std::size_t t = 0; t < 3; ++t) {
    auto& s = steps[t];
    s.A = mat(2, 2, {1.0, 0.1, 0.0, 1.0});
    s.b = vec({0.05, -0.02});
    s.H = mat(1, 2, {1.0, 0.5});
    s.g = vec({0.1});
    s.C = Matrix(0, 2);
    s.d = Vector(0);
    s.E = Matrix(0, 2);
    s.f = Vector(0);
  }
  steps[1].C = mat(1, 2, {1.0, -1.0});
  steps[1].d = vec({-0.2});
  steps[2].C = mat(1, 2, {0.5, 1.0});
  steps[2].d = vec({-0.6});
  steps[2].E = mat(1, 2, {1.0, 0.0});
  steps[2].f = vec({-1.0});
  return csmooth::AffineModel(std::move(steps),
                              csmooth::PerStep<Matrix>(mat(2, 2, {0.2, 0.05, 0.05, 0.1})),
                              csmooth::PerStep<Matrix>(mat(1, 1, {0.3})), vec({0.5, -0.3}),
                              mat(2, 2, {1.0, 0.2, 0.2, 0.5}));
}

inline csmooth::MeasurementSequence three_step_meas() {
  csmooth::MeasurementSequence y(3, 1);
  y[0] = vec({1.0});
  y[1] = vec({0.7});
  y[2] = vec({1.4});
  return y;
}

inline csmooth::Trajectory three_step_traj() {
  csmooth::Trajectory x(3, 2);
  x[0] = vec({0.3, -0.1});
  x[1] = vec({0.6, 0.2});
  x[2] = vec({0.9, 0.4});
  return x;
}

/// rho1 = 2, rho2 = 3, v = (-, 0.1, 0), eta = (-, 0.4, -0.2), zeta = (-, -, 0.3).
inline csmooth::SplitState three_step_split(const csmooth::ConstraintSet& cons) {
  csmooth::SplitParams p;
  p.rho1 = 2.0;
  p.rho2 = 3.0;
  csmooth::SplitState s(cons, p);
  s.set_aux(1, vec({0.1}));
  s.set_aux(2, vec({0.0}));
  s.set_ineq_mult(1, vec({0.4}));
  s.set_ineq_mult(2, vec({-0.2}));
  s.set_eq_mult(2, vec({0.3}));
  return s;
}

inline Vector stacked(const csmooth::Trajectory& x) {
  return Eigen::Map<const Vector>(x.matrix().data(), x.matrix().size());
}

/// Scalar random-walk model x_t = x_{t-1} + q, y_t = x_t + r.
inline csmooth::AffineModel scalar_model(std::size_t steps, double q, double r, double m0,
                                         double p0) {
  std::vector<csmooth::AffineStep> s(steps);
  for (auto& st : s) {
    st.A = mat(1, 1, {1.0});
    st.b = vec({0.0});
    st.H = mat(1, 1, {1.0});
    st.g = vec({0.0});
    st.C = Matrix(0, 1);
    st.d = Vector(0);
    st.E = Matrix(0, 1);
    st.f = Vector(0);
  }
  return csmooth::AffineModel(std::move(s), csmooth::PerStep<Matrix>(mat(1, 1, {q})),
                              csmooth::PerStep<Matrix>(mat(1, 1, {r})), vec({m0}),
                              mat(1, 1, {p0}));
}

}  // namespace fixtures
