#pragma once

// Inner-product-space primitives: Gram volumes, |det| of maps between
// different inner-product spaces, orthonormalization and the realification
// of real/complex/quaternionic matrices into flat real coordinates.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <variant>

#include "orbitmeasure/config.hpp"
#include "orbitmeasure/errors.hpp"

namespace orbitmeasure {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

namespace detail {

inline bool all_finite(const MatrixXd& m) { return m.allFinite(); }

/// det of a symmetric positive semidefinite matrix. Cholesky first, then the
/// eigenvalue product when the factorization breaks down near singularity.
inline double psd_determinant(const MatrixXd& gram, const Tolerances& tol = {}) {
  if (gram.rows() == 0) return 1.0;
  if (!gram.allFinite()) throw Error(ErrorCode::non_finite, "Gram matrix has non-finite entries");
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    const auto diag = llt.matrixLLT().diagonal();
    if ((diag.array() > 0.0).all()) {
      const double p = diag.prod();
      return p * p;
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const VectorXd& ev = eig.eigenvalues();
  const double scale = std::max({std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()),
                                 gram.diagonal().cwiseAbs().maxCoeff()});
  double det = 1.0;
  for (Index i = 0; i < ev.size(); ++i) {
    double lambda = ev(i);
    if (lambda < 0.0) {
      if (-lambda <= tol.clamp * std::max(scale, 1e-300)) {
        lambda = 0.0;
      } else {
        throw Error(ErrorCode::internal_error,
                    "Gram matrix has a negative eigenvalue beyond roundoff: " + std::to_string(lambda));
      }
    }
    det *= lambda;
  }
  return det;
}

inline bool is_diagonal(const MatrixXd& m, double rel_tol) {
  const double scale = m.diagonal().cwiseAbs().maxCoeff();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (i != j && std::abs(m(i, j)) > rel_tol * scale) return false;
  return true;
}

}  // namespace detail

/// Finite-dimensional real inner-product space, carried as a basis of
/// ambient coordinate vectors (columns) together with its Gram form.
class InnerProductSpace {
 public:
  InnerProductSpace() = default;

  /// Basis columns with an explicit Gram form gram(i,j) = <b_i, b_j>.
  InnerProductSpace(MatrixXd basis, MatrixXd gram, const Tolerances& tol = {})
      : basis_(std::move(basis)), gram_(std::move(gram)) {
    validate(tol);
  }

  /// Basis columns with the flat ambient inner product.
  static InnerProductSpace from_basis(const MatrixXd& basis, const Tolerances& tol = {}) {
    return InnerProductSpace(basis, basis.transpose() * basis, tol);
  }

  /// R^n with the standard inner product.
  static InnerProductSpace standard(Index n) {
    return InnerProductSpace(MatrixXd::Identity(n, n), MatrixXd::Identity(n, n));
  }

  /// R^n in standard coordinates with a non-standard Gram form.
  static InnerProductSpace with_gram(const MatrixXd& gram, const Tolerances& tol = {}) {
    return InnerProductSpace(MatrixXd::Identity(gram.rows(), gram.rows()), gram, tol);
  }

  Index dim() const { return basis_.cols(); }
  Index ambient_dim() const { return basis_.rows(); }
  const MatrixXd& basis() const { return basis_; }
  const MatrixXd& gram() const { return gram_; }

  /// Coordinates of ambient vectors (columns) relative to the basis.
  MatrixXd coordinates(const MatrixXd& vectors, double residual_tol = 1e-10) const {
    if (vectors.rows() != ambient_dim())
      throw Error(ErrorCode::ambient_mismatch, "vector length " + std::to_string(vectors.rows()) +
                                                   " differs from ambient length " +
                                                   std::to_string(ambient_dim()));
    if (vectors.cols() == 0 || dim() == 0) {
      if (dim() == 0 && vectors.size() > 0 && vectors.cwiseAbs().maxCoeff() > residual_tol)
        throw Error(ErrorCode::not_in_span, "nonzero vector in the zero space");
      return MatrixXd::Zero(dim(), vectors.cols());
    }
    MatrixXd coords = qr_.solve(vectors);
    for (Index k = 0; k < vectors.cols(); ++k) {
      const double residual = (basis_ * coords.col(k) - vectors.col(k)).norm();
      if (residual > residual_tol * std::max(1.0, vectors.col(k).norm()))
        throw Error(ErrorCode::not_in_span, "vector residual " + std::to_string(residual) +
                                                " exceeds span tolerance");
    }
    return coords;
  }

  double inner(const VectorXd& u, const VectorXd& v) const {
    return (coordinates(u).transpose() * gram_ * coordinates(v))(0, 0);
  }

 private:
  void validate(const Tolerances& tol) {
    if (gram_.rows() != basis_.cols() || gram_.cols() != basis_.cols())
      throw Error(ErrorCode::dimension_mismatch, "Gram form must be dim x dim");
    if (!basis_.allFinite() || !gram_.allFinite())
      throw Error(ErrorCode::non_finite, "inner-product space data must be finite");
    if (dim() == 0) return;
    if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > tol.symmetry * std::max(1.0, gram_.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::internal_error, "Gram form is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= tol.positive_definite * eig.eigenvalues().maxCoeff())
      throw Error(ErrorCode::rank_deficient, "Gram form is not positive definite");
    qr_.compute(basis_);
    if (qr_.rank() != dim()) throw Error(ErrorCode::rank_deficient, "basis vectors are linearly dependent");
  }

  MatrixXd basis_;
  MatrixXd gram_;
  Eigen::ColPivHouseholderQR<MatrixXd> qr_;
};

/// Linear map between two inner-product spaces; coord(i,j) is the i-th
/// codomain coordinate of the image of the j-th domain basis vector.
struct LinearMapBetween {
  InnerProductSpace domain;
  InnerProductSpace codomain;
  MatrixXd coord;

  LinearMapBetween(InnerProductSpace dom, InnerProductSpace cod, MatrixXd c)
      : domain(std::move(dom)), codomain(std::move(cod)), coord(std::move(c)) {
    if (coord.rows() != codomain.dim() || coord.cols() != domain.dim())
      throw Error(ErrorCode::dimension_mismatch, "coordinate matrix must be codomain.dim x domain.dim");
  }

  VectorXd apply(const VectorXd& domain_coords) const { return coord * domain_coords; }

  /// this ∘ inner
  LinearMapBetween after(const LinearMapBetween& inner) const {
    if (inner.codomain.dim() != domain.dim())
      throw Error(ErrorCode::dimension_mismatch, "composition through spaces of different dimension");
    return {inner.domain, codomain, coord * inner.coord};
  }
};

/// Vol(v_1..v_k) = sqrt(det <v_i, v_j>) in the given space.
inline double gram_volume(const MatrixXd& vectors, const InnerProductSpace& space, const Tolerances& tol = {}) {
  if (vectors.cols() == 0) return 1.0;
  const MatrixXd coords = space.coordinates(vectors, tol.span_residual);
  const MatrixXd a = coords.transpose() * space.gram() * coords;
  return std::sqrt(detail::psd_determinant(0.5 * (a + a.transpose()), tol));
}

/// |det A| = Vol(Av_1..Av_n) / Vol(v_1..v_n) over the stored domain basis.
inline double map_abs_det(const LinearMapBetween& map, const Tolerances& tol = {}) {
  if (map.domain.dim() != map.codomain.dim())
    throw Error(ErrorCode::dimension_mismatch, "|det| needs equal dimensions, got " +
                                                   std::to_string(map.domain.dim()) + " -> " +
                                                   std::to_string(map.codomain.dim()));
  if (map.domain.dim() == 0) return 1.0;
  if (!map.coord.allFinite()) throw Error(ErrorCode::non_finite, "map coordinates are not finite");
  const MatrixXd& gv = map.domain.gram();
  MatrixXd image_gram = map.coord.transpose() * map.codomain.gram() * map.coord;
  image_gram = 0.5 * (image_gram + image_gram.transpose());
  if (detail::is_diagonal(gv, tol.orthogonal_fast_path) &&
      detail::is_diagonal(image_gram, tol.orthogonal_fast_path)) {
    double ratio = 1.0;
    for (Index i = 0; i < gv.rows(); ++i) ratio *= std::sqrt(std::max(image_gram(i, i), 0.0) / gv(i, i));
    return ratio;
  }
  return std::sqrt(detail::psd_determinant(image_gram, tol) / detail::psd_determinant(gv, tol));
}

/// Modified Gram-Schmidt (two passes) under the space's inner product.
inline MatrixXd orthonormalize(const MatrixXd& vectors, const InnerProductSpace& space, const Tolerances& tol = {}) {
  MatrixXd coords = space.coordinates(vectors, tol.span_residual);
  const MatrixXd& g = space.gram();
  for (Index k = 0; k < coords.cols(); ++k) {
    const double original = std::sqrt(std::max(0.0, coords.col(k).dot(g * coords.col(k))));
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < k; ++j) coords.col(k) -= coords.col(j).dot(g * coords.col(k)) * coords.col(j);
    const double norm = std::sqrt(std::max(0.0, coords.col(k).dot(g * coords.col(k))));
    if (original == 0.0 || norm <= tol.rank_deficiency * original)
      throw Error(ErrorCode::rank_deficient, "vector " + std::to_string(k) + " is dependent on its predecessors");
    coords.col(k) /= norm;
  }
  return space.basis() * coords;
}

/// Orthonormal basis (flat ambient metric) of the part of span(outer) that is
/// orthogonal to span(inner). `outer` must have orthonormal columns.
inline MatrixXd orthogonal_complement(const MatrixXd& outer, const MatrixXd& inner) {
  const Index big = outer.cols();
  if (inner.cols() == 0) return outer;
  const MatrixXd projected = outer.transpose() * inner;
  Eigen::JacobiSVD<MatrixXd> svd(projected, Eigen::ComputeFullU);
  const VectorXd& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++rank;
  return outer * svd.matrixU().rightCols(big - rank);
}

// ---------------------------------------------------------------------------
// Realification

enum class Field { real, complex, quaternion };

constexpr std::string_view to_string(Field f) {
  switch (f) {
    case Field::real: return "real";
    case Field::complex: return "complex";
    case Field::quaternion: return "quaternion";
  }
  return "unknown";
}

/// Quaternionic matrix a + b i + c j + d k stored as four real parts.
struct QuaternionMatrix {
  MatrixXd a, b, c, d;

  static QuaternionMatrix zero(Index rows, Index cols) {
    return {MatrixXd::Zero(rows, cols), MatrixXd::Zero(rows, cols), MatrixXd::Zero(rows, cols),
            MatrixXd::Zero(rows, cols)};
  }
  Index rows() const { return a.rows(); }
  Index cols() const { return a.cols(); }
};

/// 2n x 2n complex embedding, block (p,q) = [[z1, z2], [-conj z2, conj z1]]
/// with z1 = a + b i, z2 = c + d i.
inline MatrixXcd complex_embedding(const QuaternionMatrix& q) {
  MatrixXcd out(2 * q.rows(), 2 * q.cols());
  for (Index i = 0; i < q.rows(); ++i)
    for (Index j = 0; j < q.cols(); ++j) {
      const cplx z1(q.a(i, j), q.b(i, j));
      const cplx z2(q.c(i, j), q.d(i, j));
      out(2 * i, 2 * j) = z1;
      out(2 * i, 2 * j + 1) = z2;
      out(2 * i + 1, 2 * j) = -std::conj(z2);
      out(2 * i + 1, 2 * j + 1) = std::conj(z1);
    }
  return out;
}

using EntryMatrix = std::variant<MatrixXd, MatrixXcd, QuaternionMatrix>;

/// Row-major linearization. Real entries map to one coordinate, complex
/// a+bi to (a,b), quaternion a+bi+cj+dk to (a,b,c,d). The flat inner
/// product of the result equals Re tr(A^dagger B).
inline VectorXd realify(Field field, const EntryMatrix& m) {
  const auto mismatch = [&] {
    return Error(ErrorCode::field_mismatch, "matrix entries do not match field " + std::string(to_string(field)));
  };
  switch (field) {
    case Field::real: {
      const auto* r = std::get_if<MatrixXd>(&m);
      if (!r) throw mismatch();
      VectorXd out(r->size());
      for (Index i = 0; i < r->rows(); ++i)
        for (Index j = 0; j < r->cols(); ++j) out(i * r->cols() + j) = (*r)(i, j);
      return out;
    }
    case Field::complex: {
      const auto* c = std::get_if<MatrixXcd>(&m);
      if (!c) throw mismatch();
      VectorXd out(2 * c->size());
      for (Index i = 0; i < c->rows(); ++i)
        for (Index j = 0; j < c->cols(); ++j) {
          out(2 * (i * c->cols() + j)) = (*c)(i, j).real();
          out(2 * (i * c->cols() + j) + 1) = (*c)(i, j).imag();
        }
      return out;
    }
    case Field::quaternion: {
      const auto* q = std::get_if<QuaternionMatrix>(&m);
      if (!q) throw mismatch();
      VectorXd out(4 * q->a.size());
      for (Index i = 0; i < q->rows(); ++i)
        for (Index j = 0; j < q->cols(); ++j) {
          const Index base = 4 * (i * q->cols() + j);
          out(base) = q->a(i, j);
          out(base + 1) = q->b(i, j);
          out(base + 2) = q->c(i, j);
          out(base + 3) = q->d(i, j);
        }
      return out;
    }
  }
  throw mismatch();
}

/// Storage layout for matrix Lie data: square matrices of the given size,
/// entries real or complex (quaternionic data is held through its complex
/// embedding). Converts between matrices and flat real coordinates.
struct MatrixLayout {
  Field storage = Field::complex;
  Index size = 1;

  Index ambient_dim() const { return storage == Field::real ? size * size : 2 * size * size; }

  MatrixXcd to_matrix(const VectorXd& v) const {
    if (v.size() != ambient_dim())
      throw Error(ErrorCode::size_mismatch, "ambient vector of length " + std::to_string(v.size()) +
                                                " does not match layout " + std::to_string(ambient_dim()));
    MatrixXcd m(size, size);
    if (storage == Field::real) {
      for (Index i = 0; i < size; ++i)
        for (Index j = 0; j < size; ++j) m(i, j) = v(i * size + j);
    } else {
      for (Index i = 0; i < size; ++i)
        for (Index j = 0; j < size; ++j) m(i, j) = cplx(v(2 * (i * size + j)), v(2 * (i * size + j) + 1));
    }
    return m;
  }

  VectorXd from_matrix(const MatrixXcd& m) const {
    if (m.rows() != size || m.cols() != size)
      throw Error(ErrorCode::size_mismatch, "matrix size does not match layout");
    if (storage == Field::real) return realify(Field::real, EntryMatrix(MatrixXd(m.real())));
    return realify(Field::complex, EntryMatrix(m));
  }
};

}  // namespace orbitmeasure
