#include <gtest/gtest.h>

#include <random>

#include "orbitmeasure/linalg.hpp"

using namespace orbitmeasure;

namespace {

MatrixXd cols(std::initializer_list<std::initializer_list<double>> vs) {
  const Index n = static_cast<Index>(vs.begin()->size());
  MatrixXd m(n, static_cast<Index>(vs.size()));
  Index j = 0;
  for (const auto& v : vs) {
    Index i = 0;
    for (double x : v) m(i++, j) = x;
    ++j;
  }
  return m;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal_error;
}

}  // namespace

TEST(GramVolume, OrthonormalBasisHasUnitVolume) {
  EXPECT_NEAR(gram_volume(cols({{1, 0}, {0, 1}}), InnerProductSpace::standard(2)), 1.0, 1e-15);
}

TEST(GramVolume, SingleVectorIsItsNorm) {
  EXPECT_NEAR(gram_volume(cols({{3}}), InnerProductSpace::standard(1)), 3.0, 1e-15);
}

TEST(GramVolume, SkewPairHandComputed) {
  // det [[1,1],[1,2]] = 1
  EXPECT_NEAR(gram_volume(cols({{1, 0}, {1, 1}}), InnerProductSpace::standard(2)), 1.0, 1e-14);
}

TEST(GramVolume, EmptySetHasUnitVolume) {
  EXPECT_EQ(gram_volume(MatrixXd(3, 0), InnerProductSpace::standard(3)), 1.0);
}

TEST(GramVolume, VectorOutsideSpanIsRejected) {
  const auto line = InnerProductSpace::from_basis(cols({{1, 0}}));
  EXPECT_EQ(code_of([&] { gram_volume(cols({{0, 1}}), line); }), ErrorCode::not_in_span);
  EXPECT_EQ(code_of([&] { gram_volume(cols({{0, 1, 0}}), line); }), ErrorCode::ambient_mismatch);
}

TEST(MapAbsDet, IdentityAndScaling) {
  const auto s3 = InnerProductSpace::standard(3);
  EXPECT_NEAR(map_abs_det({s3, s3, MatrixXd::Identity(3, 3)}), 1.0, 1e-15);
  EXPECT_NEAR(map_abs_det({s3, s3, -2.0 * MatrixXd::Identity(3, 3)}), 8.0, 1e-14);
}

TEST(MapAbsDet, NonStandardCodomainGram) {
  const auto dom = InnerProductSpace::standard(2);
  const auto cod = InnerProductSpace::with_gram(Eigen::Vector2d(4.0, 1.0).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(map_abs_det({dom, cod, MatrixXd::Identity(2, 2)}), 2.0, 1e-14);
}

TEST(MapAbsDet, DimensionMismatch) {
  const auto s2 = InnerProductSpace::standard(2);
  const auto s3 = InnerProductSpace::standard(3);
  EXPECT_EQ(code_of([&] { map_abs_det({s2, s3, MatrixXd::Zero(3, 2)}); }), ErrorCode::dimension_mismatch);
  EXPECT_EQ(code_of([&] { LinearMapBetween(s2, s3, MatrixXd::Zero(2, 2)); }), ErrorCode::dimension_mismatch);
}

TEST(MapAbsDet, SingularMapHasZeroDeterminant) {
  const auto s2 = InnerProductSpace::standard(2);
  EXPECT_NEAR(map_abs_det({s2, s2, cols({{1, 1}, {1, 1}})}), 0.0, 1e-7);
}

TEST(MapAbsDet, FastPathMatchesGeneralPath) {
  const auto s2 = InnerProductSpace::standard(2);
  const MatrixXd diag = Eigen::Vector2d(3.0, -0.5).asDiagonal();
  Tolerances no_fast;
  no_fast.orthogonal_fast_path = -1.0;
  EXPECT_NEAR(map_abs_det({s2, s2, diag}), map_abs_det({s2, s2, diag}, no_fast), 1e-14);
  EXPECT_NEAR(map_abs_det({s2, s2, diag}), 1.5, 1e-14);
}

TEST(MapAbsDet, BasisIndependence) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  auto random = [&](Index r, Index c) {
    MatrixXd m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
  };
  for (int trial = 0; trial < 20; ++trial) {
    // a 3-dim subspace of R^5 mapped into R^4 with a random metric
    const MatrixXd basis = random(5, 3);
    const auto dom = InnerProductSpace::from_basis(basis);
    const MatrixXd h = random(4, 4);
    const auto cod = InnerProductSpace(random(6, 4), h * h.transpose() + MatrixXd::Identity(4, 4));
    const MatrixXd coord = random(4, 3);
    // restrict codomain to the image span: compose with a 3-dim codomain
    const MatrixXd q = random(4, 3);
    const auto cod3 = InnerProductSpace::from_basis(cod.basis() * q);
    const double ref = map_abs_det({dom, cod3, coord.topRows(3)});
    const MatrixXd change = random(3, 3) + 3.0 * MatrixXd::Identity(3, 3);
    const auto dom2 = InnerProductSpace::from_basis(basis * change);
    EXPECT_NEAR(map_abs_det({dom2, cod3, coord.topRows(3) * change}), ref, 1e-9 * ref);
  }
}

TEST(Orthonormalize, OrthonormalInputIsKept) {
  const MatrixXd e = MatrixXd::Identity(3, 3);
  const MatrixXd q = orthonormalize(e, InnerProductSpace::standard(3));
  EXPECT_LT((q.cwiseAbs() - e).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Orthonormalize, HandGramSchmidt) {
  const MatrixXd q = orthonormalize(cols({{1, 0}, {1, 1}}), InnerProductSpace::standard(2));
  EXPECT_LT((q - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Orthonormalize, DependentInput) {
  EXPECT_EQ(code_of([] { orthonormalize(cols({{1, 0}, {2, 0}}), InnerProductSpace::standard(2)); }),
            ErrorCode::rank_deficient);
}

TEST(Orthonormalize, RespectsGram) {
  const auto space = InnerProductSpace::with_gram(Eigen::Vector2d(4.0, 9.0).asDiagonal().toDenseMatrix());
  const MatrixXd q = orthonormalize(cols({{1, 1}, {0, 1}}), space);
  const MatrixXd g = q.transpose() * space.gram() * q;
  EXPECT_LT((g - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(InnerProductSpace, RejectsBadGram) {
  const MatrixXd b = MatrixXd::Identity(2, 2);
  EXPECT_THROW(InnerProductSpace(b, cols({{1, 0.5}, {0, 1}})), Error);   // asymmetric
  EXPECT_THROW(InnerProductSpace(b, cols({{1, 0}, {0, -1}})), Error);    // indefinite
  EXPECT_THROW(InnerProductSpace::from_basis(cols({{1, 0}, {2, 0}})), Error);  // rank deficient
}

TEST(Realify, RealIdentity) {
  const VectorXd v = realify(Field::real, EntryMatrix(MatrixXd(MatrixXd::Identity(2, 2))));
  EXPECT_EQ(v, (VectorXd(4) << 1, 0, 0, 1).finished());
}

TEST(Realify, ComplexUnit) {
  MatrixXcd m(1, 1);
  m(0, 0) = cplx(0, 1);
  EXPECT_EQ(realify(Field::complex, EntryMatrix(m)), (VectorXd(2) << 0, 1).finished());
}

TEST(Realify, FlatInnerProductIsRealTrace) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXcd a = MatrixXcd::Random(3, 3);
    const MatrixXcd b = MatrixXcd::Random(3, 3);
    const double flat = realify(Field::complex, EntryMatrix(a)).dot(realify(Field::complex, EntryMatrix(b)));
    EXPECT_NEAR(flat, (a.adjoint() * b).trace().real(), 1e-13);
  }
}

TEST(Realify, FieldMismatch) {
  EXPECT_EQ(code_of([] { realify(Field::complex, EntryMatrix(MatrixXd(MatrixXd::Identity(2, 2)))); }),
            ErrorCode::field_mismatch);
}

TEST(Realify, QuaternionEmbeddingPreservesInnerProductUpToTwo) {
  auto q = QuaternionMatrix::zero(2, 2);
  q.a << 1, 2, 3, 4;
  q.b << 0, 1, 0, -1;
  q.c << 2, 0, 0, 1;
  q.d << 0, 0, 5, 0;
  const VectorXd flat = realify(Field::quaternion, EntryMatrix(q));
  const MatrixXcd z = complex_embedding(q);
  EXPECT_NEAR(2.0 * flat.squaredNorm(), (z.adjoint() * z).trace().real(), 1e-13);
}

TEST(MatrixLayout, RoundTripAndSizeCheck) {
  const MatrixLayout lay{Field::complex, 3};
  const MatrixXcd m = MatrixXcd::Random(3, 3);
  EXPECT_LT((lay.to_matrix(lay.from_matrix(m)) - m).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(code_of([&] { lay.to_matrix(VectorXd::Zero(5)); }), ErrorCode::size_mismatch);
}
