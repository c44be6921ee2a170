#include <doctest.h>

#include "csmooth/oracle.hpp"
#include "csmooth/problems.hpp"
#include "fixtures.hpp"

#include <random>

using namespace csmooth;
using fixtures::vec;

TEST_CASE("theta gradient vanishes at the unconstrained smoother solution") {
  std::mt19937_64 rng(1);
  problems::AffineSpec spec;
  spec.max_ineq = 0;
  spec.max_eq = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = problems::random_affine(rng, spec);
    const auto x = cks_solve(inst.model, inst.split, inst.meas);
    CHECK(oracle::batch_theta_grad(inst.model.as_model(), x, inst.meas).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("theta gradient matches central differences") {
  std::mt19937_64 rng(2);
  const auto inst = problems::random_nonlinear(rng);
  for (int rep = 0; rep < 10; ++rep) {
    Trajectory x = inst.init;
    x.matrix() += 0.3 * Matrix::Random(x.matrix().rows(), x.matrix().cols());
    const Vector g = oracle::batch_theta_grad(inst.model, x, inst.meas);
    const auto f = [&](const Vector& s) -> Vector {
      Trajectory xs(Eigen::Map<const Matrix>(s.data(), x.matrix().rows(), x.matrix().cols()));
      return Vector::Constant(1, eval_theta(inst.model, xs, inst.meas));
    };
    const Vector fd = finite_diff_jacobian(f, fixtures::stacked(x)).transpose();
    CHECK((g - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()) <= 1e-5);
  }
}

TEST_CASE("theta gradient by hand for a single step") {
  // H = I, g = 0, R = I, P = I, y = m = 0: grad = (x - y) + (x - m) = 2u.
  std::vector<AffineStep> s(1);
  s[0].H = Matrix::Identity(2, 2);
  s[0].g = Vector::Zero(2);
  s[0].C = Matrix(0, 2);
  s[0].d = Vector(0);
  s[0].E = Matrix(0, 2);
  s[0].f = Vector(0);
  const AffineModel aff(s, PerStep<Matrix>(Matrix::Identity(2, 2)), PerStep<Matrix>(Matrix::Identity(2, 2)),
                        Vector::Zero(2), Matrix::Identity(2, 2));
  MeasurementSequence y(1, 2);
  Trajectory x(1, 2);
  x[0] = vec({0.4, -1.3});
  const Vector g = oracle::batch_theta_grad(aff.as_model(), x, y);
  CHECK((g - 2.0 * vec({0.4, -1.3})).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("dense QP solve") {
  SUBCASE("scalar weighted average") {
    const auto aff = fixtures::scalar_model(1, 1.0, 1.0, 0.0, 1.0);
    MeasurementSequence y(1, 1);
    y[0] = vec({2.0});
    const SplitState s(ConstraintSet::none(1, 1), SplitParams{});
    CHECK(oracle::batch_qp_solve(aff, s, y)[0](0) == doctest::Approx(1.0));
  }
  SUBCASE("frozen three-step minimizers") {
    const auto aff = fixtures::three_step_model();
    const auto split = fixtures::three_step_split(aff.as_constraints());
    const auto y = fixtures::three_step_meas();
    const Vector scaled = vec({0.6246154372146242, 0.24543265935180753, 0.6239489771502851,
                               0.28871872128932735, 0.8803069477757175, 0.3363755256887758});
    const Vector unscaled = vec({0.564693398991876, 0.33392900300567036, 0.5521004077237487,
                                 0.3902121737552177, 0.7908669643827355, 0.44289513206286124});
    CHECK((fixtures::stacked(oracle::batch_qp_solve(aff, split, y)) - scaled).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((fixtures::stacked(oracle::batch_qp_solve(aff, split, y, PenaltyScaling::Unscaled)) - unscaled)
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
  SUBCASE("stationary at its own solution with a symmetric Hessian") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
      const auto inst = problems::random_affine(rng);
      const auto sys = oracle::batch_qp_system(inst.model, inst.split, inst.meas);
      CHECK((sys.hessian - sys.hessian.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      const auto x = oracle::batch_qp_solve(inst.model, inst.split, inst.meas);
      CHECK(oracle::batch_qp_gradient(inst.model, inst.split, inst.meas, x).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("Gauss-Newton on an affine problem converges in one step") {
  std::mt19937_64 rng(4);
  const auto inst = problems::random_affine(rng);
  InnerOptions opts;
  opts.record_iterates = true;
  const auto model = inst.model.as_model();
  const auto r = oracle::batch_gauss_newton(model, inst.model.as_constraints(), inst.split,
                                            prior_rollout(model), inst.meas, opts);
  CHECK(r.converged);
  REQUIRE(r.iterates.size() >= 1);
  CHECK(r.iterates[0].max_abs_diff(oracle::batch_qp_solve(inst.model, inst.split, inst.meas)) <= 1e-10);
}

TEST_CASE("dense solves beyond the memory limit are refused") {
  CHECK(oracle::dense_bytes(1000, 4) == std::size_t{4000} * 4000 * sizeof(double));
  std::mt19937_64 rng(5);
  const auto p = problems::random_active_inequality(rng, 50);
  oracle::BatchOptions tiny;
  tiny.max_dense_bytes = oracle::dense_bytes(49, 2);
  SolveOptions o;
  o.max_outer = 2;
  CHECK_THROWS_AS(oracle::batch_split_solve(p.model, p.cons, p.meas, o, tiny), SizeLimitError);
  tiny.max_dense_bytes = oracle::dense_bytes(50, 2);
  CHECK_NOTHROW(oracle::batch_split_solve(p.model, p.cons, p.meas, o, tiny));
}

TEST_CASE("zero-length problems are rejected") {
  const auto id = [](const Vector& x) -> Vector { return x; };
  const Matrix eye = Matrix::Identity(1, 1);
  CHECK_THROWS_AS(NonlinearModel::time_invariant(0, id, id, eye, eye, vec({0.0}), eye), ContractError);
  CHECK_THROWS_AS(ConstraintSet::none(0, 1), ContractError);
}
