#pragma once

// Generalized ensembles: the orbit-tangent map Psi_y, the radial factor
// J(y) = C |det Psi_y| (C = 1 under the normal-metric normalization), joint
// densities, the full pullback route through phi: G/K x Y -> X, and numeric
// checks of the geometric conditions.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "orbitmeasure/config.hpp"
#include "orbitmeasure/errors.hpp"
#include "orbitmeasure/lie.hpp"
#include "orbitmeasure/linalg.hpp"
#include "orbitmeasure/report.hpp"

namespace orbitmeasure {

using MatrixFunction = std::function<double(const MatrixXcd&)>;
using ChartFunction = std::function<double(const VectorXd&)>;

/// Parametrization t in R^r -> y(t) of the eigenvalue manifold Y.
struct ChartModel {
  Index r = 0;
  std::function<VectorXd(const VectorXd&)> point;     // throws ChartDomain outside the chart
  std::function<MatrixXd(const VectorXd&)> tangents;  // ambient x r, analytic dy/dt_i
  std::function<bool(const VectorXd&, double)> regular;  // false on the numeric proxy of Y_z
  std::function<VectorXd(std::mt19937_64&)> draw_regular;  // well-separated random chart point
};

enum class PsiMode { analytic, finite_difference };

struct EnsembleSpec {
  std::string key;
  LieGroupModel group;
  SubspaceDecomposition decomposition;
  ActionKind action = ActionKind::adjoint_on_subspace;
  InnerProductSpace x_space;  // flat model: the linear span of X, or the ambient matrix space for group manifolds
  Index x_dim = 0;            // manifold dimension of X
  ChartModel chart;
  MatrixFunction weight;      // G-invariant p on ambient points
  int degree = 1;
  bool analytic_flow = true;

  // measure changes dx' = u dx, dy' = v dy, dmu' = lambda dmu
  MatrixFunction x_measure_density;
  ChartFunction y_measure_density;
  double mu_scale = 1.0;

  Index dim_k() const { return decomposition.k_basis.cols(); }
  Index dim_l() const { return decomposition.l_basis.cols(); }
  Index r() const { return chart.r; }
  const MatrixLayout& layout() const { return group.layout; }

  const InnerProductSpace& l_space() const {
    if (l_space_.dim() != dim_l() || l_space_.ambient_dim() != group.ambient_dim())
      l_space_ = InnerProductSpace::from_basis(decomposition.l_basis);
    return l_space_;
  }

  /// Structural invariants: dimension count and degree.
  void validate() const {
    if (dim_l() + r() != x_dim)
      throw Error(ErrorCode::bad_params, key + ": dim l + r = " + std::to_string(dim_l() + r()) +
                                             " but dim X = " + std::to_string(x_dim));
    if (dim_k() + dim_l() != group.dim())
      throw Error(ErrorCode::bad_params, key + ": k and l do not split the algebra");
    if (degree < 1) throw Error(ErrorCode::bad_params, key + ": covering degree must be >= 1");
    l_space();
  }

  /// Orthonormal basis of T_y X (flat ambient metric).
  MatrixXd tangent_space_basis(const VectorXd& y) const {
    if (action == ActionKind::adjoint_on_subspace) return x_space.basis();
    const MatrixXcd ym = layout().to_matrix(y);
    MatrixXd cols(group.ambient_dim(), group.dim());
    for (Index i = 0; i < group.dim(); ++i)
      cols.col(i) = layout().from_matrix(ym * layout().to_matrix(group.algebra_basis.col(i)));
    Eigen::HouseholderQR<MatrixXd> qr(cols);
    return qr.householderQ() * MatrixXd::Identity(cols.rows(), cols.cols());
  }

 private:
  mutable InnerProductSpace l_space_;
};

// ---------------------------------------------------------------------------
// Psi_y

/// Columns Psi_y(xi_i) for the stored l-basis, as ambient vectors.
inline MatrixXd psi_columns(const EnsembleSpec& spec, const VectorXd& y, PsiMode mode, const Tolerances& tol = {}) {
  if (mode == PsiMode::analytic && !spec.analytic_flow)
    throw Error(ErrorCode::unsupported_mode, spec.key + " has no analytic flow derivative");
  if (!y.allFinite()) throw Error(ErrorCode::non_finite, "non-finite chart point");
  const auto& l = spec.decomposition.l_basis;
  MatrixXd cols(spec.group.ambient_dim(), l.cols());
  if (mode == PsiMode::analytic) {
    const MatrixXcd ym = spec.layout().to_matrix(y);
    for (Index i = 0; i < l.cols(); ++i) {
      const MatrixXcd xi = spec.layout().to_matrix(l.col(i));
      cols.col(i) = spec.layout().from_matrix(xi * ym - ym * xi);
    }
  } else {
    for (Index i = 0; i < l.cols(); ++i)
      cols.col(i) = flow_derivative(spec.layout(), spec.action, y, l.col(i), tol.fd_step, tol.richardson);
  }
  return cols;
}

/// Orthonormal basis of the normal space to T_yY inside T_yX; equals T_yO_y
/// wherever the transversality and orthogonality conditions hold.
inline MatrixXd orbit_codomain_basis(const EnsembleSpec& spec, const VectorXd& y, const MatrixXd& chart_tangents) {
  MatrixXd basis = orthogonal_complement(spec.tangent_space_basis(y), chart_tangents);
  if (basis.cols() != spec.dim_l())
    throw Error(ErrorCode::dimension_mismatch, spec.key + ": normal space has dimension " +
                                                   std::to_string(basis.cols()) + ", expected dim l = " +
                                                   std::to_string(spec.dim_l()));
  return basis;
}

/// Psi_y : l -> T_yO_y at y = y(t).
inline LinearMapBetween psi_map(const EnsembleSpec& spec, const VectorXd& t, PsiMode mode = PsiMode::analytic,
                                const Tolerances& tol = {}) {
  const VectorXd y = spec.chart.point(t);
  const MatrixXd codomain = orbit_codomain_basis(spec, y, spec.chart.tangents(t));
  const MatrixXd cols = psi_columns(spec, y, mode, tol);
  return {spec.l_space(), InnerProductSpace::from_basis(codomain), codomain.transpose() * cols};
}

namespace detail {

inline double measure_factor(const EnsembleSpec& spec, const MatrixXcd& y, const VectorXd& t) {
  double factor = 1.0 / spec.mu_scale;
  if (spec.x_measure_density) factor *= spec.x_measure_density(y);
  if (spec.y_measure_density) factor /= spec.y_measure_density(t);
  return factor;
}

struct JacobianParts {
  double value = 0.0;
  VectorXd singular_values;
};

inline JacobianParts jacobian_parts(const EnsembleSpec& spec, const VectorXd& t, PsiMode mode, const Tolerances& tol) {
  JacobianParts out;
  const LinearMapBetween psi = psi_map(spec, t, mode, tol);
  if (psi.coord.size() == 0) {
    out.value = 1.0;
  } else {
    Eigen::JacobiSVD<MatrixXd> svd(psi.coord);
    out.singular_values = svd.singularValues();
    const double top = out.singular_values.maxCoeff();
    const double bottom = out.singular_values.minCoeff();
    out.value = (top <= 0.0 || bottom < tol.rank * top) ? 0.0 : map_abs_det(psi, tol);
  }
  out.value *= measure_factor(spec, spec.layout().to_matrix(spec.chart.point(t)), t);
  return out;
}

}  // namespace detail

/// J(y(t)) = C |det Psi_y| with C = 1; exactly 0 where Psi_y is rank deficient.
inline double jacobian_factor(const EnsembleSpec& spec, const VectorXd& t, PsiMode mode = PsiMode::analytic,
                              const Tolerances& tol = {}) {
  return detail::jacobian_parts(spec, t, mode, tol).value;
}

struct DensityEvaluation {
  VectorXd t;
  VectorXd y;
  double J = 0.0;
  double p = 0.0;
  double density = 0.0;        // p * J, w.r.t. the Riemannian measure dy
  double chart_volume = 1.0;   // Gram volume of dy/dt_i
  double density_chart = 0.0;  // density * chart_volume, w.r.t. dt
  VectorXd psi_singular_values;
  bool regular = true;
};

inline DensityEvaluation joint_density(const EnsembleSpec& spec, const VectorXd& t, PsiMode mode = PsiMode::analytic,
                                       const Tolerances& tol = {}) {
  DensityEvaluation ev;
  ev.t = t;
  ev.y = spec.chart.point(t);
  const auto parts = detail::jacobian_parts(spec, t, mode, tol);
  ev.J = parts.value;
  ev.psi_singular_values = parts.singular_values;
  ev.p = spec.weight(spec.layout().to_matrix(ev.y));
  ev.density = ev.p * ev.J;
  ev.chart_volume = gram_volume(spec.chart.tangents(t), InnerProductSpace::standard(spec.group.ambient_dim()), tol);
  ev.density_chart = ev.density * ev.chart_volume;
  ev.regular = spec.chart.regular(t, tol.gap);
  return ev;
}

// ---------------------------------------------------------------------------
// Pullback route

/// Smooth map between equal-dimension charts. The domain metric is given by
/// its Gram form at the evaluation point; the codomain is measured with the
/// flat metric of the output coordinates (or `codomain_gram` when set).
struct ChartedMap {
  Index domain_dim = 0;
  Index codomain_dim = 0;
  std::function<VectorXd(const VectorXd&)> map;
  MatrixXd domain_gram;
  MatrixXd codomain_gram;  // empty = identity
};

/// |det (d phi)_x| with a finite-difference Jacobian assembled column by column.
inline double pullback_determinant(const ChartedMap& phi, const VectorXd& x, const Tolerances& tol = {}) {
  if (phi.domain_dim != phi.codomain_dim)
    throw Error(ErrorCode::dimension_mismatch, "pullback needs charts of equal dimension");
  if (x.size() != phi.domain_dim) throw Error(ErrorCode::dimension_mismatch, "chart point has wrong length");
  if (!x.allFinite()) throw Error(ErrorCode::non_finite, "non-finite chart point");
  const double h = tol.fd_step;
  if (!(h > 0.0)) throw Error(ErrorCode::step_underflow, "finite-difference step must be positive");
  if (phi.domain_dim == 0) return 1.0;

  const auto central = [&](Index i, double step) {
    VectorXd plus = x, minus = x;
    plus(i) += step;
    minus(i) -= step;
    if (plus(i) == x(i) || minus(i) == x(i))
      throw Error(ErrorCode::step_underflow, "step is below the resolution of coordinate " + std::to_string(i));
    return VectorXd((phi.map(plus) - phi.map(minus)) / (plus(i) - minus(i)));
  };
  const VectorXd base = phi.map(x);
  MatrixXd jac(base.size(), phi.domain_dim);
  for (Index i = 0; i < phi.domain_dim; ++i)
    jac.col(i) = tol.richardson ? VectorXd((4.0 * central(i, 0.5 * h) - central(i, h)) / 3.0) : central(i, h);
  if (!jac.allFinite()) throw Error(ErrorCode::non_finite, "Jacobian has non-finite entries");

  MatrixXd image_gram = phi.codomain_gram.size() ? MatrixXd(jac.transpose() * phi.codomain_gram * jac)
                                                 : MatrixXd(jac.transpose() * jac);
  image_gram = 0.5 * (image_gram + image_gram.transpose());
  return std::sqrt(detail::psd_determinant(image_gram, tol) / detail::psd_determinant(phi.domain_gram, tol));
}

/// phi([g exp(sum s_i l_i)], y(t')) around (s, t') = (0, t). The G/K chart is
/// the left translate of exp|l, an isometry at s = 0 for the normal metric.
inline ChartedMap orbit_chart_map(const EnsembleSpec& spec, const MatrixXcd& g, const VectorXd& t) {
  const Index dl = spec.dim_l();
  const Index r = spec.r();
  const MatrixXd& l = spec.decomposition.l_basis;
  const MatrixXd tangents = spec.chart.tangents(t);

  ChartedMap phi;
  phi.domain_dim = dl + r;
  phi.codomain_dim = spec.x_dim;
  phi.domain_gram = MatrixXd::Zero(dl + r, dl + r);
  phi.domain_gram.topLeftCorner(dl, dl) = l.transpose() * l;
  phi.domain_gram.bottomRightCorner(r, r) = tangents.transpose() * tangents;
  phi.map = [layout = spec.layout(), l, point = spec.chart.point, g, dl, r](const VectorXd& z) {
    const MatrixXcd h = g * expm(layout.to_matrix(l * z.head(dl)));
    const MatrixXcd y = layout.to_matrix(point(z.tail(r)));
    return layout.from_matrix(h * y * h.inverse());
  };
  return phi;
}

inline VectorXd orbit_chart_origin(const EnsembleSpec& spec, const VectorXd& t) {
  VectorXd z = VectorXd::Zero(spec.dim_l() + spec.r());
  z.tail(spec.r()) = t;
  return z;
}

/// J through the full map at ([g], y(t)) instead of through Psi_y.
inline double pullback_jacobian(const EnsembleSpec& spec, const MatrixXcd& g, const VectorXd& t,
                                const Tolerances& tol = {}) {
  return pullback_determinant(orbit_chart_map(spec, g, t), orbit_chart_origin(spec, t), tol) *
         detail::measure_factor(spec, spec.layout().to_matrix(spec.chart.point(t)), t);
}

/// |J([g],y) - J([e],y)| / J([e],y).
inline double gauge_invariance_check(const EnsembleSpec& spec, const MatrixXcd& g, const VectorXd& t,
                                     const Tolerances& tol = {}) {
  const double residual = membership_residual(spec.group, g);
  if (!(residual < 1e-9))
    throw Error(ErrorCode::not_in_group, spec.key + ": group residual " + std::to_string(residual));
  const Index n = spec.layout().size;
  const double at_g = pullback_jacobian(spec, g, t, tol);
  const double at_e = pullback_jacobian(spec, MatrixXcd::Identity(n, n), t, tol);
  return at_e > 0.0 ? std::abs(at_g - at_e) / at_e : std::abs(at_g - at_e);
}

// ---------------------------------------------------------------------------
// Weights and invariance

/// Random point of X: y(t) at a regular t moved by a random group element.
inline MatrixXcd random_point(const EnsembleSpec& spec, std::mt19937_64& rng) {
  const VectorXd t = spec.chart.draw_regular(rng);
  return act(random_group_element(spec.group, rng), spec.layout().to_matrix(spec.chart.point(t)));
}

/// max |f(sigma_g x) - f(x)| / (1 + |f(x)|) over random (g, x).
inline double invariance_defect(const EnsembleSpec& spec, const MatrixFunction& f, std::mt19937_64& rng,
                                int draws = 20) {
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    const MatrixXcd x = random_point(spec, rng);
    const MatrixXcd g = random_group_element(spec.group, rng);
    const double fx = f(x);
    worst = std::max(worst, std::abs(f(act(g, x)) - fx) / (1.0 + std::abs(fx)));
  }
  return worst;
}

/// Change of measures dx' = u dx, dy' = v dy, dmu' = lambda dmu; the returned
/// spec reports J' = u / (lambda v) * J.
inline EnsembleSpec transform_weights(const EnsembleSpec& spec, MatrixFunction u, ChartFunction v, double lambda,
                                      std::uint64_t seed = 0x5eed, const Tolerances& tol = {}) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::bad_params, "measure scale must be a positive constant");
  if (u) {
    std::mt19937_64 rng(seed);
    const double defect = invariance_defect(spec, u, rng);
    if (!(defect <= tol.invariance))
      throw Error(ErrorCode::non_invariant_weight, "u is not G-invariant (defect " + std::to_string(defect) + ")");
  }
  EnsembleSpec out = spec;
  if (u) {
    out.x_measure_density = spec.x_measure_density
                                ? MatrixFunction([a = spec.x_measure_density, u](const MatrixXcd& x) { return a(x) * u(x); })
                                : u;
  }
  if (v) {
    out.y_measure_density = spec.y_measure_density
                                ? ChartFunction([a = spec.y_measure_density, v](const VectorXd& t) { return a(t) * v(t); })
                                : v;
  }
  out.mu_scale = spec.mu_scale * lambda;
  return out;
}

// ---------------------------------------------------------------------------
// Conditions

inline IsotropyRank isotropy_rank_check(const EnsembleSpec& spec, const VectorXd& y, const Tolerances& tol = {}) {
  return isotropy_rank(spec.group, spec.action, y, tol);
}

struct ConditionReport {
  VectorXd t;
  bool in_y_z = false;
  double orthogonality = 0.0;       // max |<dy/dt_i, Psi(xi_j)>| / scale
  Index transversal_rank = 0;
  Index expected_rank = 0;
  Index kernel_dim = 0;
  Index expected_kernel = 0;
  double regularity = 0.0;          // min singular value of d phi, relative to the largest
  bool orthogonality_ok = false;
  bool transversality_ok = false;
  bool dimension_ok = false;
  bool regularity_ok = false;

  bool all_conditions() const { return orthogonality_ok && transversality_ok && dimension_ok && regularity_ok; }
  bool passed() const { return in_y_z || all_conditions(); }
};

/// Orthogonality (T_yY ⊥ T_yO_y), transversality (T_yX = T_yO_y ⊕ T_yY),
/// dimension (dim G_y = dim K) and regularity of d phi at ([e], y(t)).
inline ConditionReport check_conditions(const EnsembleSpec& spec, const VectorXd& t, const Tolerances& tol = {}) {
  ConditionReport rep;
  rep.t = t;
  rep.in_y_z = !spec.chart.regular(t, tol.gap);
  const VectorXd y = spec.chart.point(t);
  const MatrixXd tangents = spec.chart.tangents(t);
  const MatrixXd psi = psi_columns(spec, y, spec.analytic_flow ? PsiMode::analytic : PsiMode::finite_difference, tol);

  const double t_scale = tangents.cols() ? tangents.colwise().norm().maxCoeff() : 0.0;
  const double p_scale = psi.cols() ? psi.colwise().norm().maxCoeff() : 0.0;
  const double scale = t_scale * p_scale;
  const double raw = (tangents.cols() && psi.cols()) ? (tangents.transpose() * psi).cwiseAbs().maxCoeff() : 0.0;
  rep.orthogonality = scale > 0.0 ? raw / scale : 0.0;
  rep.orthogonality_ok = rep.orthogonality < tol.orthogonality;

  MatrixXd joint(y.size(), tangents.cols() + psi.cols());
  joint << tangents, psi;
  rep.expected_rank = spec.x_dim;
  rep.transversal_rank = numeric_rank(Eigen::JacobiSVD<MatrixXd>(joint).singularValues(), tol.rank, 0.0);
  rep.transversality_ok = rep.transversal_rank == rep.expected_rank;

  const IsotropyRank iso = isotropy_rank_check(spec, y, tol);
  rep.kernel_dim = iso.kernel_dim;
  rep.expected_kernel = spec.dim_k();
  rep.dimension_ok = iso.kernel_dim == spec.dim_k();

  // d phi in orthonormal coordinates of T_yX, chart directions normalized by their Gram form
  const MatrixXd tx = spec.tangent_space_basis(y);
  MatrixXd unit_tangents = tangents;
  if (tangents.cols()) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(tangents.transpose() * tangents);
    unit_tangents = tangents * eig.operatorInverseSqrt();
  }
  MatrixXd dphi(tx.cols(), joint.cols());
  dphi << tx.transpose() * psi, tx.transpose() * unit_tangents;
  if (dphi.size() == 0) {
    rep.regularity = 1.0;
  } else {
    const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(dphi).singularValues();
    rep.regularity = sv.maxCoeff() > 0.0 ? sv.minCoeff() / sv.maxCoeff() : 0.0;
    if (dphi.rows() != dphi.cols()) rep.regularity = 0.0;
  }
  rep.regularity_ok = rep.regularity > tol.rank;
  return rep;
}

inline void append_condition_records(ValidationReport& report, const std::vector<ConditionReport>& reps,
                                     const Tolerances& tol = {}) {
  CheckRecord orth{"orthogonality", true, 0.0, tol.orthogonality};
  CheckRecord trans{"transversality", true, 0.0, 0.0};
  CheckRecord dim{"dimension", true, 0.0, 0.0};
  CheckRecord reg{"regularity", true, 1.0, tol.rank};
  orth.count = trans.count = dim.count = reg.count = 0;
  std::size_t flagged = 0;
  for (const auto& r : reps) {
    if (r.in_y_z) {
      ++flagged;
      continue;
    }
    ++orth.count, ++trans.count, ++dim.count, ++reg.count;
    orth.value = std::max(orth.value, r.orthogonality);
    if (!r.orthogonality_ok) ++orth.failures;
    trans.value = std::max(trans.value, static_cast<double>(std::abs(r.transversal_rank - r.expected_rank)));
    if (!r.transversality_ok) ++trans.failures;
    dim.value = std::max(dim.value, static_cast<double>(std::abs(r.kernel_dim - r.expected_kernel)));
    if (!r.dimension_ok) ++dim.failures;
    reg.value = std::min(reg.value, r.regularity);
    if (!r.regularity_ok) ++reg.failures;
  }
  for (CheckRecord* c : {&orth, &trans, &dim, &reg}) {
    c->passed = c->failures == 0;
    if (flagged) c->detail = std::to_string(flagged) + " point(s) flagged in Y_z";
    report.add(*c);
  }
}

}  // namespace orbitmeasure
