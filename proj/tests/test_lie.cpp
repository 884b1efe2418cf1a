#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orbitmeasure/instances.hpp"
#include "orbitmeasure/lie.hpp"

using namespace orbitmeasure;

namespace {

const MatrixLayout kReal2{Field::real, 2};
const MatrixLayout kComplex2{Field::complex, 2};

VectorXd real2(double a, double b, double c, double d) { return (VectorXd(4) << a, b, c, d).finished(); }

VectorXd diag_point(const MatrixLayout& lay, const VectorXd& t) {
  return lay.from_matrix(MatrixXcd(t.cast<cplx>().asDiagonal()));
}

}  // namespace

TEST(Expm, ZeroIsIdentity) {
  EXPECT_LT((expm(MatrixXcd::Zero(3, 3)) - MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Expm, QuarterRotation) {
  const auto model = build_instance("gaussian-beta1", {2}).group;
  const double theta = std::numbers::pi / 2;
  const VectorXd g = exp_matrix(model, real2(0, -theta, theta, 0), 1.0);
  EXPECT_LT((g - real2(0, -1, 1, 0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Expm, InverseProperty) {
  std::mt19937_64 rng(5);
  const auto model = build_instance("gaussian-beta2", {3}).group;
  for (int i = 0; i < 10; ++i) {
    const MatrixXcd xi = model.layout.to_matrix(random_algebra_element(model, rng, 2.0));
    EXPECT_LT((expm(xi) * expm(-xi) - MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Expm, LargeNormMatchesEigenDecomposition) {
  MatrixXcd h = MatrixXcd::Random(4, 4);
  h = (h + h.adjoint()).eval() * 20.0;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(h);
  const MatrixXcd ref = eig.eigenvectors() *
                        eig.eigenvalues().unaryExpr([](double l) { return std::exp(cplx(0, l)); }).asDiagonal() *
                        eig.eigenvectors().adjoint();
  EXPECT_LT((expm(cplx(0, 1) * h) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FlowDerivative, ZeroGeneratorGivesZero) {
  const VectorXd y = diag_point(kComplex2, Eigen::Vector2d(0, 1));
  const VectorXd v = flow_derivative(kComplex2, ActionKind::adjoint_on_subspace, y, VectorXd::Zero(8), 1e-5);
  EXPECT_LT(v.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FlowDerivative, HandCommutator) {
  const double s = 1.0 / std::sqrt(2.0);
  MatrixXcd xi = MatrixXcd::Zero(2, 2);
  xi(0, 1) = s;
  xi(1, 0) = -s;
  MatrixXcd expect = MatrixXcd::Zero(2, 2);
  expect(0, 1) = expect(1, 0) = s;
  const VectorXd y = diag_point(kComplex2, Eigen::Vector2d(0, 1));
  const VectorXd v = flow_derivative(kComplex2, ActionKind::adjoint_on_subspace, y, kComplex2.from_matrix(xi), 1e-5);
  EXPECT_LT((v - kComplex2.from_matrix(expect)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FlowDerivative, AgreesWithCommutatorOnGue) {
  const auto spec = build_instance("gaussian-beta2", {3});
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 100; ++i) {
    const VectorXd xi = random_algebra_element(spec.group, rng);
    VectorXd c(spec.x_space.dim());
    for (Index k = 0; k < c.size(); ++k) c(k) = normal(rng);
    const VectorXd y = spec.x_space.basis() * c;
    const VectorXd fd = flow_derivative(spec.layout(), spec.action, y, xi, 1e-5);
    EXPECT_LT((fd - commutator(spec.layout(), xi, y)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(FlowDerivative, LinearInGenerator) {
  const auto spec = build_instance("gaussian-beta2", {2});
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal;
  const VectorXd y = diag_point(spec.layout(), Eigen::Vector2d(-0.3, 1.2));
  for (int i = 0; i < 20; ++i) {
    const VectorXd xi = random_algebra_element(spec.group, rng);
    const VectorXd eta = random_algebra_element(spec.group, rng);
    const double a = normal(rng), b = normal(rng);
    const auto f = [&](const VectorXd& z) { return flow_derivative(spec.layout(), spec.action, y, z, 1e-5); };
    EXPECT_LT((f(a * xi + b * eta) - a * f(xi) - b * f(eta)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(FlowDerivative, StepUnderflow) {
  const VectorXd y = diag_point(kComplex2, Eigen::Vector2d(0, 1));
  try {
    flow_derivative(kComplex2, ActionKind::adjoint_on_subspace, y, y, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::step_underflow);
  }
}

TEST(Commutator, CenterCommutes) {
  std::mt19937_64 rng(1);
  const auto model = build_instance("gaussian-beta2", {2}).group;
  const VectorXd xi = random_algebra_element(model, rng);
  const VectorXd y = diag_point(kComplex2, Eigen::Vector2d(2.5, 2.5));
  EXPECT_LT(commutator(kComplex2, xi, y).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Commutator, RealHandComputation) {
  const double l1 = 0.7, l2 = -1.9;
  const VectorXd br = commutator(kReal2, real2(0, 1, -1, 0), real2(l1, 0, 0, l2));
  EXPECT_LT((br - (l2 - l1) * real2(0, 1, 1, 0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Commutator, Antisymmetry) {
  const VectorXd a = real2(0.1, 2, -3, 0.4), b = real2(1, -1, 0.5, 2);
  EXPECT_LT((commutator(kReal2, a, b) + commutator(kReal2, b, a)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Commutator, SizeMismatch) {
  try {
    commutator(kReal2, VectorXd::Zero(4), VectorXd::Zero(8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::size_mismatch);
  }
}

TEST(IsotropyRank, GueRegularPoint) {
  const auto spec = build_instance("gaussian-beta2", {2});
  const auto iso = isotropy_rank_check(spec, diag_point(spec.layout(), Eigen::Vector2d(0, 1)));
  EXPECT_EQ(iso.rank, 2);
  EXPECT_EQ(iso.kernel_dim, 2);
}

TEST(IsotropyRank, GueCentralPoint) {
  const auto spec = build_instance("gaussian-beta2", {2});
  const auto iso = isotropy_rank_check(spec, diag_point(spec.layout(), Eigen::Vector2d(1, 1)));
  EXPECT_EQ(iso.rank, 0);
  EXPECT_EQ(iso.kernel_dim, 4);
}

TEST(IsotropyRank, GoeRegularPoint) {
  const auto spec = build_instance("gaussian-beta1", {2});
  const auto iso = isotropy_rank_check(spec, diag_point(spec.layout(), Eigen::Vector2d(0, 1)));
  EXPECT_EQ(iso.rank, 1);
  EXPECT_EQ(iso.kernel_dim, 0);
}

TEST(Decomposition, EveryInstanceIsValid) {
  for (const auto& key : instance_keys())
    for (int n : {1, 2, 3}) {
      if (key == "su2-group" && n != 2) continue;
      const auto spec = build_instance(key, {n});
      const auto check = validate_decomposition(spec.group, spec.decomposition);
      EXPECT_TRUE(check.direct) << key << " n=" << n;
      EXPECT_TRUE(check.spans) << key << " n=" << n;
      EXPECT_TRUE(check.subalgebra) << key << " n=" << n;
      EXPECT_LT(bracket_closure_residual(spec.group), 1e-9) << key << " n=" << n;
    }
}

TEST(Membership, RandomElementsLieInTheirGroups) {
  std::mt19937_64 rng(9);
  for (const auto& key : instance_keys()) {
    const auto spec = build_instance(key, {2});
    for (int i = 0; i < 5; ++i)
      EXPECT_LT(membership_residual(spec.group, random_group_element(spec.group, rng)), 1e-12) << key;
  }
  const auto so = build_instance("gaussian-beta1", {2}).group;
  MatrixXcd phase = MatrixXcd::Identity(2, 2);
  phase(0, 0) = cplx(0, 1);
  EXPECT_GT(membership_residual(so, phase), 0.5);
}
