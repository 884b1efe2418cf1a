#pragma once

// Matrix Lie group and algebra mechanics: exponentials, one-parameter flows
// of the conjugation action, analytic commutators and isotropy ranks.

#include <Eigen/Dense>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "orbitmeasure/config.hpp"
#include "orbitmeasure/errors.hpp"
#include "orbitmeasure/linalg.hpp"

namespace orbitmeasure {

enum class GroupType {
  orthogonal,        // O(n), real storage
  unitary,           // U(n)
  special_unitary,   // SU(n)
  symplectic,        // compact Sp(n) inside U(2n)
  unitary_blocks,    // U(p) x U(q), block diagonal
};

struct LieGroupModel {
  std::string name;
  GroupType type = GroupType::unitary;
  Field field = Field::complex;  // declared entry field
  MatrixLayout layout;           // storage (quaternions via their complex embedding)
  MatrixXd algebra_basis;        // realified basis of the Lie algebra, one column each
  Index block_split = 0;         // first block size for unitary_blocks

  Index matrix_size() const { return field == Field::quaternion ? layout.size / 2 : layout.size; }
  Index ambient_dim() const { return layout.ambient_dim(); }
  Index dim() const { return algebra_basis.cols(); }
};

/// g = k ⊕ l, both given as realified column bases.
struct SubspaceDecomposition {
  MatrixXd k_basis;
  MatrixXd l_basis;
};

/// Both action kinds realize sigma_g(x) = g x g^{-1}; they differ in whether
/// X is an open piece of a linear subspace or a group manifold.
enum class ActionKind { adjoint_on_subspace, conjugation_on_submanifold };

constexpr std::string_view to_string(ActionKind kind) {
  return kind == ActionKind::adjoint_on_subspace ? "adjoint-on-subspace" : "conjugation-on-submanifold";
}

// ---------------------------------------------------------------------------
// Matrix exponential

/// Scaling and squaring around the [13/13] Pade approximant.
inline MatrixXcd expm(const MatrixXcd& a) {
  if (!a.allFinite()) throw Error(ErrorCode::non_finite, "matrix exponential of non-finite input");
  const Index n = a.rows();
  if (n == 0) return a;
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const MatrixXcd s = a / std::ldexp(1.0, squarings);
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  const MatrixXcd s2 = s * s;
  const MatrixXcd s4 = s2 * s2;
  const MatrixXcd s6 = s4 * s2;
  const MatrixXcd u_inner = s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 + b[3] * s2 + b[1] * id;
  const MatrixXcd u = s * u_inner;
  const MatrixXcd v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * id;
  MatrixXcd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

/// exp(t xi) for a realified algebra element; returns the realified group element.
inline VectorXd exp_matrix(const LieGroupModel& model, const VectorXd& xi, double t) {
  if (!xi.allFinite() || !std::isfinite(t)) throw Error(ErrorCode::non_finite, "exp of non-finite input");
  return model.layout.from_matrix(expm(t * model.layout.to_matrix(xi)));
}

// ---------------------------------------------------------------------------
// Action and its flows

inline MatrixXcd act(const MatrixXcd& g, const MatrixXcd& x) { return g * x * g.inverse(); }

/// Derivative of t -> exp(t xi) x exp(-t xi) at t = 0, by central differences.
/// With Richardson on, D(h) and D(h/2) are combined to cancel the h^2 term.
inline MatrixXcd flow_derivative_matrix(const MatrixXcd& y, const MatrixXcd& xi, double h, bool richardson) {
  const auto central = [&](double step) {
    const MatrixXcd forward = expm(step * xi);
    const MatrixXcd backward = expm(-step * xi);
    return MatrixXcd((forward * y * backward - backward * y * forward) / (2.0 * step));
  };
  if (!richardson) return central(h);
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

inline VectorXd flow_derivative(const MatrixLayout& layout, ActionKind /*kind*/, const VectorXd& y, const VectorXd& xi,
                                double h, bool richardson = true) {
  if (!(h > 0.0)) throw Error(ErrorCode::step_underflow, "finite-difference step must be positive");
  if (!y.allFinite() || !xi.allFinite()) throw Error(ErrorCode::non_finite, "flow derivative of non-finite input");
  const VectorXd out = layout.from_matrix(flow_derivative_matrix(layout.to_matrix(y), layout.to_matrix(xi), h, richardson));
  if (!out.allFinite()) throw Error(ErrorCode::non_finite, "flow derivative produced non-finite values");
  return out;
}

/// realify(xi y - y xi)
inline VectorXd commutator(const MatrixLayout& layout, const VectorXd& xi, const VectorXd& y) {
  if (xi.size() != y.size() || xi.size() != layout.ambient_dim())
    throw Error(ErrorCode::size_mismatch, "commutator operands differ in size");
  const MatrixXcd a = layout.to_matrix(xi);
  const MatrixXcd b = layout.to_matrix(y);
  return layout.from_matrix(a * b - b * a);
}

struct IsotropyRank {
  Index rank = 0;
  Index kernel_dim = 0;
};

inline Index numeric_rank(const VectorXd& singular_values, double rel_tol, double abs_floor) {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values.maxCoeff();
  if (top <= abs_floor) return 0;
  Index rank = 0;
  for (Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > rel_tol * top) ++rank;
  return rank;
}

/// Rank and kernel dimension of xi -> d/dt sigma_{exp t xi}(y) over the whole algebra.
inline IsotropyRank isotropy_rank(const LieGroupModel& model, ActionKind kind, const VectorXd& y,
                                  const Tolerances& tol = {}) {
  const Index dim = model.dim();
  IsotropyRank out;
  if (dim == 0) return out;
  MatrixXd columns(model.ambient_dim(), dim);
  for (Index i = 0; i < dim; ++i)
    columns.col(i) = flow_derivative(model.layout, kind, y, model.algebra_basis.col(i), tol.fd_step, tol.richardson);
  Eigen::JacobiSVD<MatrixXd> svd(columns);
  const double floor = 1e-9 * (1.0 + y.norm()) * model.algebra_basis.colwise().norm().maxCoeff();
  out.rank = numeric_rank(svd.singularValues(), tol.rank, floor);
  out.kernel_dim = dim - out.rank;
  return out;
}

// ---------------------------------------------------------------------------
// Structural checks

/// Largest distance of [xi_i, xi_j] from span(basis), over all basis pairs.
inline double bracket_closure_residual(const LieGroupModel& model) {
  const Index dim = model.dim();
  if (dim == 0) return 0.0;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(model.algebra_basis);
  double worst = 0.0;
  for (Index i = 0; i < dim; ++i)
    for (Index j = i + 1; j < dim; ++j) {
      const VectorXd br = commutator(model.layout, model.algebra_basis.col(i), model.algebra_basis.col(j));
      const VectorXd proj = model.algebra_basis * qr.solve(br);
      worst = std::max(worst, (br - proj).norm());
    }
  return worst;
}

struct DecompositionCheck {
  bool direct = false;       // k ∩ l = 0
  bool spans = false;        // k + l = g
  bool subalgebra = false;   // [k, k] ⊂ k
  double closure_residual = 0.0;
};

inline DecompositionCheck validate_decomposition(const LieGroupModel& model, const SubspaceDecomposition& dec,
                                                 const Tolerances& tol = {}) {
  DecompositionCheck out;
  const Index kd = dec.k_basis.cols();
  const Index ld = dec.l_basis.cols();
  MatrixXd joint(model.ambient_dim(), kd + ld);
  joint << dec.k_basis, dec.l_basis;
  const Index rank = joint.cols() ? numeric_rank(Eigen::JacobiSVD<MatrixXd>(joint).singularValues(), 1e-10, 0.0) : 0;
  out.direct = (rank == kd + ld);
  if (model.dim() > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(model.algebra_basis);
    double residual = joint.size() ? (model.algebra_basis * qr.solve(joint) - joint).cwiseAbs().maxCoeff() : 0.0;
    out.spans = out.direct && rank == model.dim() && residual < 1e-9;
  } else {
    out.spans = kd + ld == 0;
  }
  double worst = 0.0;
  if (kd > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> kqr(dec.k_basis);
    for (Index i = 0; i < kd; ++i)
      for (Index j = i + 1; j < kd; ++j) {
        const VectorXd br = commutator(model.layout, dec.k_basis.col(i), dec.k_basis.col(j));
        worst = std::max(worst, (br - dec.k_basis * kqr.solve(br)).norm());
      }
  }
  out.closure_residual = worst;
  out.subalgebra = worst < tol.bracket_closure;
  return out;
}

/// Distance of g from the group: unitarity plus the type-specific constraint.
inline double membership_residual(const LieGroupModel& model, const MatrixXcd& g) {
  const Index n = model.layout.size;
  if (g.rows() != n || g.cols() != n) return std::numeric_limits<double>::infinity();
  double res = (g.adjoint() * g - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  switch (model.type) {
    case GroupType::orthogonal:
      res = std::max(res, g.imag().cwiseAbs().maxCoeff());
      break;
    case GroupType::special_unitary:
      res = std::max(res, std::abs(g.determinant() - cplx(1.0, 0.0)));
      break;
    case GroupType::symplectic: {
      MatrixXcd j = MatrixXcd::Zero(n, n);
      for (Index b = 0; b + 1 < n; b += 2) {
        j(b, b + 1) = 1.0;
        j(b + 1, b) = -1.0;
      }
      res = std::max(res, (g.transpose() * j * g - j).cwiseAbs().maxCoeff());
      break;
    }
    case GroupType::unitary_blocks: {
      const Index p = model.block_split;
      res = std::max(res, g.topRightCorner(p, n - p).cwiseAbs().maxCoeff());
      res = std::max(res, g.bottomLeftCorner(n - p, p).cwiseAbs().maxCoeff());
      break;
    }
    case GroupType::unitary:
      break;
  }
  return res;
}

inline VectorXd random_algebra_element(const LieGroupModel& model, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd c(model.dim());
  for (Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
  return model.algebra_basis * c;
}

/// exp of a Gaussian algebra element: lands in the identity component.
inline MatrixXcd random_group_element(const LieGroupModel& model, std::mt19937_64& rng, double scale = 1.0) {
  return expm(model.layout.to_matrix(random_algebra_element(model, rng, scale)));
}

}  // namespace orbitmeasure
