#pragma once

// Registry of concrete generalized ensembles with their classical radial
// densities and covering degrees.
//
// Parameters: `n` is the matrix size (the first block size p for
// chiral-beta2). `m` is the Wishart degrees of freedom (default n + 1) or
// the second block size q for chiral-beta2 (default p). 0 selects the default.

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "orbitmeasure/ensemble.hpp"

namespace orbitmeasure {

enum class InstanceKind {
  gaussian_beta1,
  gaussian_beta2,
  gaussian_beta4,
  spd_wishart,
  unitary_group,
  su2_group,
  algebra_u,
  chiral_beta2,
};

enum class Family { linear, nonlinear_noncompact, compact_group, algebra };

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::linear: return "linear";
    case Family::nonlinear_noncompact: return "nonlinear-noncompact";
    case Family::compact_group: return "compact-group";
    case Family::algebra: return "algebra";
  }
  return "unknown";
}

struct InstanceParams {
  int n = 2;
  int m = 0;
};

/// Ordered-chamber box of the chart, per axis.
struct ChamberBox {
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;  // lo and hi identified; grid excludes hi
  bool truncated_lo = false;
  bool truncated_hi = false;
};

struct InstanceDescriptor {
  std::string key;
  InstanceKind kind = InstanceKind::gaussian_beta2;
  Family family = Family::linear;
  int n = 1;     // matrix size (p for chiral)
  int m = 0;     // Wishart dof, or q for chiral
  int beta = 0;  // Dyson index where applicable
  int degree = 1;
  bool has_oracle = true;
};

namespace detail {

struct KeyEntry {
  std::string_view key;
  InstanceKind kind;
};

inline constexpr std::array<KeyEntry, 8> kRegistry = {{
    {"gaussian-beta1", InstanceKind::gaussian_beta1},
    {"gaussian-beta2", InstanceKind::gaussian_beta2},
    {"gaussian-beta4", InstanceKind::gaussian_beta4},
    {"spd-wishart", InstanceKind::spd_wishart},
    {"unitary-group", InstanceKind::unitary_group},
    {"su2-group", InstanceKind::su2_group},
    {"algebra-u", InstanceKind::algebra_u},
    {"chiral-beta2", InstanceKind::chiral_beta2},
}};

}  // namespace detail

inline std::vector<std::string> instance_keys() {
  std::vector<std::string> keys;
  for (const auto& e : detail::kRegistry) keys.emplace_back(e.key);
  return keys;
}

inline InstanceKind parse_key(std::string_view key) {
  for (const auto& e : detail::kRegistry)
    if (e.key == key) return e.kind;
  throw Error(ErrorCode::unknown_key, "unknown instance key '" + std::string(key) + "'");
}

inline long long factorial(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Number of points in which a generic orbit meets Y (Weyl-group order).
inline int declared_degree(std::string_view key, int n) {
  switch (parse_key(key)) {
    case InstanceKind::su2_group: return 2;
    default: return static_cast<int>(factorial(n));
  }
}

inline InstanceDescriptor describe(std::string_view key, InstanceParams params = {}) {
  InstanceDescriptor d;
  d.key = std::string(key);
  d.kind = parse_key(key);
  d.n = params.n;
  if (params.n < 1) throw Error(ErrorCode::bad_params, "n must be >= 1");
  switch (d.kind) {
    case InstanceKind::gaussian_beta1: d.family = Family::linear; d.beta = 1; break;
    case InstanceKind::gaussian_beta2: d.family = Family::linear; d.beta = 2; break;
    case InstanceKind::gaussian_beta4: d.family = Family::linear; d.beta = 4; break;
    case InstanceKind::spd_wishart:
      d.family = Family::nonlinear_noncompact;
      d.beta = 1;
      d.m = params.m == 0 ? params.n + 1 : params.m;
      if (d.m < d.n) throw Error(ErrorCode::bad_params, "spd-wishart needs m >= n");
      break;
    case InstanceKind::unitary_group: d.family = Family::compact_group; d.beta = 2; break;
    case InstanceKind::su2_group:
      d.family = Family::compact_group;
      d.beta = 2;
      if (params.n != 2) throw Error(ErrorCode::bad_params, "su2-group has fixed size n = 2");
      break;
    case InstanceKind::algebra_u: d.family = Family::algebra; d.beta = 2; break;
    case InstanceKind::chiral_beta2:
      d.family = Family::linear;
      d.beta = 2;
      d.m = params.m == 0 ? params.n : params.m;
      if (d.m < d.n) throw Error(ErrorCode::bad_params, "chiral-beta2 needs q >= p");
      d.has_oracle = false;
      break;
  }
  d.degree = d.kind == InstanceKind::su2_group ? 2 : static_cast<int>(factorial(d.n));
  return d;
}

inline ChamberBox chamber_box(const InstanceDescriptor& d, const QuadratureOptions& q = {}) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (d.kind) {
    case InstanceKind::spd_wishart: return {1e-12, q.wishart_box, false, false, true};
    case InstanceKind::unitary_group: return {0.0, two_pi, true, false, false};
    case InstanceKind::su2_group: return {0.0, std::numbers::pi, false, false, false};
    case InstanceKind::chiral_beta2: return {0.0, q.gaussian_box, false, false, true};
    default: return {-q.gaussian_box, q.gaussian_box, false, true, true};
  }
}

// ---------------------------------------------------------------------------
// Closed-form radial densities, up to a t-independent constant

namespace detail {

inline double vandermonde(const VectorXd& t, double power) {
  double v = 1.0;
  for (Index i = 0; i < t.size(); ++i)
    for (Index j = i + 1; j < t.size(); ++j) v *= std::pow(std::abs(t(i) - t(j)), power);
  return v;
}

inline double circular_vandermonde_sq(const VectorXd& theta) {
  double v = 1.0;
  for (Index j = 0; j < theta.size(); ++j)
    for (Index k = j + 1; k < theta.size(); ++k) v *= std::norm(std::polar(1.0, theta(j)) - std::polar(1.0, theta(k)));
  return v;
}

}  // namespace detail

inline double oracle_density(const InstanceDescriptor& d, const VectorXd& t) {
  if (t.size() != (d.kind == InstanceKind::su2_group ? 1 : d.n))
    throw Error(ErrorCode::chart_domain, "chart parameter has wrong length");
  switch (d.kind) {
    case InstanceKind::gaussian_beta1:
    case InstanceKind::gaussian_beta2:
    case InstanceKind::gaussian_beta4:
    case InstanceKind::algebra_u:
      return detail::vandermonde(t, d.beta) * std::exp(-0.5 * t.squaredNorm());
    case InstanceKind::spd_wishart: {
      if ((t.array() <= 0.0).any()) throw Error(ErrorCode::chart_domain, "spd-wishart needs positive eigenvalues");
      const double a = 0.5 * (d.m - d.n - 1);
      double w = 1.0;
      for (Index i = 0; i < t.size(); ++i) w *= std::pow(t(i), a) * std::exp(-0.5 * t(i));
      return detail::vandermonde(t, 1.0) * w;
    }
    case InstanceKind::unitary_group: return detail::circular_vandermonde_sq(t);
    case InstanceKind::su2_group: return 4.0 * std::sin(t(0)) * std::sin(t(0));
    case InstanceKind::chiral_beta2:
      throw Error(ErrorCode::no_oracle, "chiral-beta2 has no registered closed-form density");
  }
  return 0.0;
}

inline double oracle_density(std::string_view key, InstanceParams params, const VectorXd& t) {
  return oracle_density(describe(key, params), t);
}

// ---------------------------------------------------------------------------
// Bases

namespace detail {

inline MatrixXcd unit(Index n, Index i, Index j, cplx value = 1.0) {
  MatrixXcd m = MatrixXcd::Zero(n, n);
  m(i, j) = value;
  return m;
}

class BasisBuilder {
 public:
  explicit BasisBuilder(MatrixLayout layout) : layout_(layout) {}
  void add(const MatrixXcd& m) { cols_.push_back(layout_.from_matrix(m)); }
  MatrixXd matrix() const {
    MatrixXd out(layout_.ambient_dim(), static_cast<Index>(cols_.size()));
    for (std::size_t i = 0; i < cols_.size(); ++i) out.col(static_cast<Index>(i)) = cols_[i];
    return out;
  }

 private:
  MatrixLayout layout_;
  std::vector<VectorXd> cols_;
};

inline MatrixXd hstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

constexpr cplx I{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Orthonormal bases under Re tr(A^dagger B).

inline MatrixXd so_basis(MatrixLayout lay) {
  BasisBuilder b(lay);
  for (Index i = 0; i < lay.size; ++i)
    for (Index j = i + 1; j < lay.size; ++j) b.add((unit(lay.size, i, j) - unit(lay.size, j, i)) * kInvSqrt2);
  return b.matrix();
}

inline MatrixXd symmetric_basis(MatrixLayout lay) {
  BasisBuilder b(lay);
  for (Index i = 0; i < lay.size; ++i) b.add(unit(lay.size, i, i));
  for (Index i = 0; i < lay.size; ++i)
    for (Index j = i + 1; j < lay.size; ++j) b.add((unit(lay.size, i, j) + unit(lay.size, j, i)) * kInvSqrt2);
  return b.matrix();
}

/// Off-diagonal skew-Hermitian units on indices [lo, hi).
inline MatrixXd u_offdiag(Index n, Index lo, Index hi) {
  BasisBuilder b({Field::complex, n});
  for (Index j = lo; j < hi; ++j)
    for (Index k = j + 1; k < hi; ++k) {
      b.add((unit(n, j, k) - unit(n, k, j)) * kInvSqrt2);
      b.add((unit(n, j, k) + unit(n, k, j)) * (I * kInvSqrt2));
    }
  return b.matrix();
}

inline MatrixXd u_torus(Index n, Index lo, Index hi) {
  BasisBuilder b({Field::complex, n});
  for (Index j = lo; j < hi; ++j) b.add(unit(n, j, j, I));
  return b.matrix();
}

inline MatrixXd hermitian_basis(Index n) {
  BasisBuilder b({Field::complex, n});
  for (Index j = 0; j < n; ++j) b.add(unit(n, j, j));
  for (Index j = 0; j < n; ++j)
    for (Index k = j + 1; k < n; ++k) {
      b.add((unit(n, j, k) + unit(n, k, j)) * kInvSqrt2);
      b.add((unit(n, j, k) - unit(n, k, j)) * (I * kInvSqrt2));
    }
  return b.matrix();
}

/// Complex embeddings of 1, i, j, k.
inline std::array<Eigen::Matrix2cd, 4> quaternion_units() {
  std::array<Eigen::Matrix2cd, 4> q;
  q[0] << 1.0, 0.0, 0.0, 1.0;
  q[1] << I, 0.0, 0.0, -I;
  q[2] << 0.0, 1.0, -1.0, 0.0;
  q[3] << 0.0, I, I, 0.0;
  return q;
}

inline MatrixXcd block(Index n, Index p, Index q, const Eigen::Matrix2cd& b) {
  MatrixXcd m = MatrixXcd::Zero(2 * n, 2 * n);
  m.block<2, 2>(2 * p, 2 * q) = b;
  return m;
}

inline double min_gap(const VectorXd& t) {
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < t.size(); ++i)
    for (Index j = i + 1; j < t.size(); ++j) gap = std::min(gap, std::abs(t(i) - t(j)));
  return gap;
}

inline double circular_distance(double a, double b) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

inline double min_circular_gap(const VectorXd& t) {
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < t.size(); ++i)
    for (Index j = i + 1; j < t.size(); ++j) gap = std::min(gap, circular_distance(t(i), t(j)));
  return gap;
}

inline void require_length(const VectorXd& t, Index r) {
  if (t.size() != r) throw Error(ErrorCode::chart_domain, "chart parameter must have length " + std::to_string(r));
  if (!t.allFinite()) throw Error(ErrorCode::chart_domain, "chart parameter is not finite");
}

template <class Draw, class Accept>
VectorXd draw_until(std::mt19937_64& rng, Index r, Draw draw, Accept accept) {
  VectorXd t(r);
  do {
    for (Index i = 0; i < r; ++i) t(i) = draw(rng);
  } while (!accept(t));
  return t;
}

inline double re_trace_square(const MatrixXcd& x) { return (x * x).trace().real(); }

constexpr double kDrawGap = 0.05;

}  // namespace detail

// ---------------------------------------------------------------------------
// Builders

inline EnsembleSpec build_instance(std::string_view key, InstanceParams params = {}) {
  using namespace detail;
  const InstanceDescriptor d = describe(key, params);
  const Index n = d.n;
  EnsembleSpec spec;
  spec.key = d.key;
  spec.degree = d.degree;

  const auto diagonal_chart = [](MatrixLayout lay, Index r, Index stride, cplx unit_value) {
    ChartModel c;
    c.r = r;
    c.point = [lay, r, stride, unit_value](const VectorXd& t) {
      require_length(t, r);
      MatrixXcd y = MatrixXcd::Zero(lay.size, lay.size);
      for (Index i = 0; i < r; ++i)
        for (Index s = 0; s < stride; ++s) y(stride * i + s, stride * i + s) = unit_value * t(i);
      return lay.from_matrix(y);
    };
    c.tangents = [lay, r, stride, unit_value](const VectorXd& t) {
      require_length(t, r);
      MatrixXd out(lay.ambient_dim(), r);
      for (Index i = 0; i < r; ++i) {
        MatrixXcd e = MatrixXcd::Zero(lay.size, lay.size);
        for (Index s = 0; s < stride; ++s) e(stride * i + s, stride * i + s) = unit_value;
        out.col(i) = lay.from_matrix(e);
      }
      return out;
    };
    c.regular = [](const VectorXd& t, double gap) { return min_gap(t) > gap; };
    c.draw_regular = [r](std::mt19937_64& rng) {
      std::normal_distribution<double> normal(0.0, 1.0);
      return draw_until(rng, r, [&](auto& g) { return normal(g); }, [](const VectorXd& t) { return min_gap(t) > kDrawGap; });
    };
    return c;
  };

  switch (d.kind) {
    case InstanceKind::gaussian_beta1:
    case InstanceKind::spd_wishart: {
      const MatrixLayout lay{Field::real, n};
      spec.group = {"O(" + std::to_string(n) + ")", GroupType::orthogonal, Field::real, lay, so_basis(lay)};
      spec.decomposition = {MatrixXd(lay.ambient_dim(), 0), spec.group.algebra_basis};
      spec.x_space = InnerProductSpace::from_basis(symmetric_basis(lay));
      spec.x_dim = n * (n + 1) / 2;
      spec.chart = diagonal_chart(lay, n, 1, 1.0);
      if (d.kind == InstanceKind::gaussian_beta1) {
        spec.weight = [](const MatrixXcd& x) { return std::exp(-0.5 * re_trace_square(x)); };
      } else {
        const double a = 0.5 * (d.m - d.n - 1);
        auto point = spec.chart.point;
        spec.chart.point = [point](const VectorXd& t) {
          if ((t.array() <= 0.0).any()) throw Error(ErrorCode::chart_domain, "spd-wishart needs positive eigenvalues");
          return point(t);
        };
        spec.chart.draw_regular = [n](std::mt19937_64& rng) {
          std::uniform_real_distribution<double> uni(0.1, 5.0);
          return draw_until(rng, n, [&](auto& g) { return uni(g); }, [](const VectorXd& t) { return min_gap(t) > kDrawGap; });
        };
        spec.weight = [a](const MatrixXcd& x) {
          const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (x.real() + x.real().transpose()),
                                                            Eigen::EigenvaluesOnly);
          const VectorXd& ev = eig.eigenvalues();
          if (ev.size() && ev.minCoeff() <= 0.0) return 0.0;
          double log_w = 0.0;
          for (Index i = 0; i < ev.size(); ++i) log_w += a * std::log(ev(i)) - 0.5 * ev(i);
          return std::exp(log_w);
        };
      }
      break;
    }
    case InstanceKind::gaussian_beta2:
    case InstanceKind::algebra_u: {
      const MatrixLayout lay{Field::complex, n};
      const MatrixXd k = u_torus(n, 0, n);
      const MatrixXd l = u_offdiag(n, 0, n);
      spec.group = {"U(" + std::to_string(n) + ")", GroupType::unitary, Field::complex, lay, hstack(k, l)};
      spec.decomposition = {k, l};
      spec.x_dim = n * n;
      if (d.kind == InstanceKind::gaussian_beta2) {
        spec.x_space = InnerProductSpace::from_basis(hermitian_basis(n));
        spec.chart = diagonal_chart(lay, n, 1, 1.0);
        spec.weight = [](const MatrixXcd& x) { return std::exp(-0.5 * re_trace_square(x)); };
      } else {
        spec.x_space = InnerProductSpace::from_basis(spec.group.algebra_basis);
        spec.chart = diagonal_chart(lay, n, 1, I);
        // exp(-|xi|^2 / 2) = exp(tr(xi^2) / 2) on skew-Hermitian matrices
        spec.weight = [](const MatrixXcd& x) { return std::exp(0.5 * re_trace_square(x)); };
      }
      break;
    }
    case InstanceKind::gaussian_beta4: {
      const MatrixLayout lay{Field::complex, 2 * n};
      const auto q = quaternion_units();
      BasisBuilder kb(lay), lb(lay), xb(lay);
      for (Index p = 0; p < n; ++p) {
        for (int u = 1; u < 4; ++u) kb.add(block(n, p, p, q[u]) * kInvSqrt2);
        xb.add(block(n, p, p, q[0]) * kInvSqrt2);
      }
      for (Index p = 0; p < n; ++p)
        for (Index r = p + 1; r < n; ++r)
          for (int u = 0; u < 4; ++u) {
            lb.add((block(n, p, r, q[u]) - block(n, r, p, q[u].adjoint())) * 0.5);
            xb.add((block(n, p, r, q[u]) + block(n, r, p, q[u].adjoint())) * 0.5);
          }
      spec.group = {"Sp(" + std::to_string(n) + ")", GroupType::symplectic, Field::quaternion, lay,
                    hstack(kb.matrix(), lb.matrix())};
      spec.decomposition = {kb.matrix(), lb.matrix()};
      spec.x_space = InnerProductSpace::from_basis(xb.matrix());
      spec.x_dim = n * (2 * n - 1);
      spec.chart = diagonal_chart(lay, n, 2, 1.0);
      // quaternionic exp(-Re tr x^2 / 2); the complex trace counts each eigenvalue twice
      spec.weight = [](const MatrixXcd& x) { return std::exp(-0.25 * re_trace_square(x)); };
      break;
    }
    case InstanceKind::unitary_group: {
      const MatrixLayout lay{Field::complex, n};
      const MatrixXd k = u_torus(n, 0, n);
      const MatrixXd l = u_offdiag(n, 0, n);
      spec.group = {"U(" + std::to_string(n) + ")", GroupType::unitary, Field::complex, lay, hstack(k, l)};
      spec.decomposition = {k, l};
      spec.action = ActionKind::conjugation_on_submanifold;
      spec.x_space = InnerProductSpace::standard(lay.ambient_dim());
      spec.x_dim = n * n;
      ChartModel c;
      c.r = n;
      c.point = [lay, n](const VectorXd& t) {
        require_length(t, n);
        MatrixXcd y = MatrixXcd::Zero(n, n);
        for (Index i = 0; i < n; ++i) y(i, i) = std::polar(1.0, t(i));
        return lay.from_matrix(y);
      };
      c.tangents = [lay, n](const VectorXd& t) {
        require_length(t, n);
        MatrixXd out(lay.ambient_dim(), n);
        for (Index i = 0; i < n; ++i) out.col(i) = lay.from_matrix(unit(n, i, i, I * std::polar(1.0, t(i))));
        return out;
      };
      c.regular = [](const VectorXd& t, double gap) { return min_circular_gap(t) > gap; };
      c.draw_regular = [n](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
        return draw_until(rng, n, [&](auto& g) { return uni(g); },
                          [](const VectorXd& t) { return min_circular_gap(t) > kDrawGap; });
      };
      spec.chart = c;
      spec.weight = [](const MatrixXcd&) { return 1.0; };
      break;
    }
    case InstanceKind::su2_group: {
      const MatrixLayout lay{Field::complex, 2};
      BasisBuilder kb(lay), lb(lay);
      Eigen::Matrix2cd sz, sx, sy;
      sz << I, 0.0, 0.0, -I;
      sx << 0.0, I, I, 0.0;
      sy << 0.0, 1.0, -1.0, 0.0;
      kb.add(MatrixXcd(sz) * kInvSqrt2);
      lb.add(MatrixXcd(sx) * kInvSqrt2);
      lb.add(MatrixXcd(sy) * kInvSqrt2);
      spec.group = {"SU(2)", GroupType::special_unitary, Field::complex, lay, hstack(kb.matrix(), lb.matrix())};
      spec.decomposition = {kb.matrix(), lb.matrix()};
      spec.action = ActionKind::conjugation_on_submanifold;
      spec.x_space = InnerProductSpace::standard(lay.ambient_dim());
      spec.x_dim = 3;
      ChartModel c;
      c.r = 1;
      c.point = [lay](const VectorXd& t) {
        require_length(t, 1);
        Eigen::Matrix2cd y = Eigen::Matrix2cd::Zero();
        y(0, 0) = std::polar(1.0, t(0));
        y(1, 1) = std::polar(1.0, -t(0));
        return lay.from_matrix(y);
      };
      c.tangents = [lay](const VectorXd& t) {
        require_length(t, 1);
        Eigen::Matrix2cd e = Eigen::Matrix2cd::Zero();
        e(0, 0) = I * std::polar(1.0, t(0));
        e(1, 1) = -I * std::polar(1.0, -t(0));
        return MatrixXd(lay.from_matrix(e));
      };
      c.regular = [](const VectorXd& t, double gap) { return circular_distance(2.0 * t(0), 0.0) > gap; };
      c.draw_regular = [](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> uni(kDrawGap, std::numbers::pi - kDrawGap);
        VectorXd t(1);
        t(0) = uni(rng);
        return t;
      };
      spec.chart = c;
      spec.weight = [](const MatrixXcd&) { return 1.0; };
      break;
    }
    case InstanceKind::chiral_beta2: {
      const Index p = n;
      const Index q = d.m;
      const Index size = p + q;
      const MatrixLayout lay{Field::complex, size};
      MatrixXd algebra = hstack(hstack(u_torus(size, 0, p), u_offdiag(size, 0, p)),
                                hstack(u_torus(size, p, size), u_offdiag(size, p, size)));
      BasisBuilder kb(lay);
      for (Index a = 0; a < p; ++a) kb.add((unit(size, a, a, I) + unit(size, p + a, p + a, I)) * kInvSqrt2);
      const MatrixXd k = hstack(kb.matrix(), hstack(u_torus(size, 2 * p, size), u_offdiag(size, 2 * p, size)));
      spec.group = {"U(" + std::to_string(p) + ")xU(" + std::to_string(q) + ")", GroupType::unitary_blocks,
                    Field::complex, lay, algebra, p};
      spec.decomposition = {k, orthogonal_complement(algebra, k)};
      BasisBuilder xb(lay);
      for (Index a = 0; a < p; ++a)
        for (Index b = 0; b < q; ++b) {
          xb.add((unit(size, a, p + b) + unit(size, p + b, a)) * kInvSqrt2);
          xb.add((unit(size, a, p + b) - unit(size, p + b, a)) * (I * kInvSqrt2));
        }
      spec.x_space = InnerProductSpace::from_basis(xb.matrix());
      spec.x_dim = 2 * p * q;
      ChartModel c;
      c.r = p;
      c.point = [lay, p](const VectorXd& s) {
        require_length(s, p);
        if ((s.array() < 0.0).any()) throw Error(ErrorCode::chart_domain, "singular values must be nonnegative");
        MatrixXcd y = MatrixXcd::Zero(lay.size, lay.size);
        for (Index a = 0; a < p; ++a) y(a, p + a) = y(p + a, a) = s(a);
        return lay.from_matrix(y);
      };
      c.tangents = [lay, p](const VectorXd& s) {
        require_length(s, p);
        MatrixXd out(lay.ambient_dim(), p);
        for (Index a = 0; a < p; ++a) out.col(a) = lay.from_matrix(unit(lay.size, a, p + a) + unit(lay.size, p + a, a));
        return out;
      };
      c.regular = [](const VectorXd& s, double gap) { return s.minCoeff() > gap && min_gap(s) > gap; };
      c.draw_regular = [p](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> uni(0.1, 3.0);
        return draw_until(rng, p, [&](auto& g) { return uni(g); }, [](const VectorXd& s) { return min_gap(s) > kDrawGap; });
      };
      spec.chart = c;
      spec.weight = [](const MatrixXcd& x) { return std::exp(-0.5 * re_trace_square(x)); };
      break;
    }
  }
  spec.validate();
  return spec;
}

/// Descriptor and wired spec of one registry entry.
struct Instance {
  InstanceDescriptor descriptor;
  EnsembleSpec spec;
};

inline Instance make_instance(std::string_view key, InstanceParams params = {}) {
  return {describe(key, params), build_instance(key, params)};
}

}  // namespace orbitmeasure
