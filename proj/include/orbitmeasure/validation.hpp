#pragma once

// Monte-Carlo samplers for the registered ensembles and their verification
// against the derived radial law: Kolmogorov-Smirnov distances of 1-D
// statistics against chamber quadrature, and the invariant-function
// integration identity in normalized-ratio form.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "orbitmeasure/config.hpp"
#include "orbitmeasure/ensemble.hpp"
#include "orbitmeasure/instances.hpp"
#include "orbitmeasure/parallel.hpp"

namespace orbitmeasure {

struct SampleBatch {
  std::string instance_key;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  MatrixXd radial;  // count x r, each row ascending
};

// ---------------------------------------------------------------------------
// Samplers

namespace detail {

inline constexpr std::size_t kChainLength = 4096;

/// Seed of sub-batch `chain`; fixed chain length keeps draws independent of
/// the worker count.
inline std::mt19937_64 chain_rng(std::uint64_t seed, std::size_t chain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain), static_cast<std::uint32_t>(chain >> 32)};
  return std::mt19937_64(seq);
}

/// Draw with density exp(-|x|^2 / (2 sigma^2)) on the span of the space.
inline MatrixXcd gaussian_in_space(const MatrixLayout& lay, const InnerProductSpace& space, double sigma,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  VectorXd z(space.dim());
  for (Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  // coordinates c with covariance sigma^2 G^{-1}: solve L^T c = z
  const Eigen::LLT<MatrixXd> llt(space.gram());
  const VectorXd c = llt.matrixU().solve(z);
  return lay.to_matrix(space.basis() * c);
}

/// Haar unitary: complex Ginibre matrix, QR, then the phases of diag(R) moved into Q.
inline MatrixXcd haar_unitary(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  MatrixXcd z(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) z(i, j) = cplx(normal(rng), normal(rng));
  Eigen::HouseholderQR<MatrixXcd> qr(z);
  MatrixXcd q = qr.householderQ();
  const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    q.col(j) *= mag > 0.0 ? r(j, j) / mag : cplx(1.0, 0.0);
  }
  return q;
}

inline VectorXd sorted(VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

inline VectorXd hermitian_eigenvalues(const MatrixXcd& x) {
  const MatrixXcd h = 0.5 * (x + x.adjoint());
  return Eigen::SelfAdjointEigenSolver<MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace detail

/// One draw from p(x) dx of the instance.
inline MatrixXcd draw_matrix(const Instance& inst, std::mt19937_64& rng) {
  const auto& spec = inst.spec;
  const auto& d = inst.descriptor;
  switch (d.kind) {
    case InstanceKind::gaussian_beta1:
    case InstanceKind::gaussian_beta2:
    case InstanceKind::algebra_u:
    case InstanceKind::chiral_beta2:
      return detail::gaussian_in_space(spec.layout(), spec.x_space, 1.0, rng);
    case InstanceKind::gaussian_beta4:
      // p = exp(-|x|^2 / 4) in the complex embedding
      return detail::gaussian_in_space(spec.layout(), spec.x_space, std::sqrt(2.0), rng);
    case InstanceKind::spd_wishart: {
      std::normal_distribution<double> normal(0.0, 1.0);
      MatrixXd g(d.n, d.m);
      for (Index i = 0; i < g.rows(); ++i)
        for (Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
      return MatrixXcd((g * g.transpose()).cast<cplx>());
    }
    case InstanceKind::unitary_group: return detail::haar_unitary(d.n, rng);
    case InstanceKind::su2_group: {
      const MatrixXcd u = detail::haar_unitary(2, rng);
      return u / std::sqrt(u.determinant());
    }
  }
  throw Error(ErrorCode::internal_error, "no sampler");
}

/// Ordered chart parameter of a sampled matrix (a point of the ascending chamber).
inline VectorXd radial_part(const Instance& inst, const MatrixXcd& x) {
  const auto& d = inst.descriptor;
  switch (d.kind) {
    case InstanceKind::gaussian_beta1:
    case InstanceKind::gaussian_beta2:
    case InstanceKind::spd_wishart:
      return detail::sorted(detail::hermitian_eigenvalues(x));
    case InstanceKind::gaussian_beta4: {
      const VectorXd ev = detail::sorted(detail::hermitian_eigenvalues(x));
      VectorXd out(d.n);
      for (Index i = 0; i < d.n; ++i) out(i) = 0.5 * (ev(2 * i) + ev(2 * i + 1));
      return out;
    }
    case InstanceKind::algebra_u:
      return detail::sorted(detail::hermitian_eigenvalues(MatrixXcd(cplx(0.0, -1.0) * x)));
    case InstanceKind::chiral_beta2: {
      const MatrixXcd w = x.topRightCorner(d.n, d.m);
      return detail::sorted(Eigen::JacobiSVD<MatrixXcd>(w).singularValues());
    }
    case InstanceKind::unitary_group: {
      const Eigen::ComplexEigenSolver<MatrixXcd> eig(x, false);
      VectorXd phases(d.n);
      constexpr double two_pi = 2.0 * std::numbers::pi;
      for (Index i = 0; i < d.n; ++i) {
        double a = std::arg(eig.eigenvalues()(i));
        if (a < 0.0) a += two_pi;
        if (a >= two_pi) a -= two_pi;
        phases(i) = a;
      }
      return detail::sorted(phases);
    }
    case InstanceKind::su2_group: {
      VectorXd theta(1);
      // eigenvalues e^{+-i theta}; Re tr = 2 cos theta
      theta(0) = std::acos(std::clamp(0.5 * x.trace().real(), -1.0, 1.0));
      return theta;
    }
  }
  throw Error(ErrorCode::internal_error, "no radial map");
}

/// Calls visit(i, x_i) for N deterministic draws; visit must only write slot i.
template <class Visit>
void for_each_draw(const Instance& inst, std::size_t count, std::uint64_t seed, Visit&& visit,
                   unsigned threads = thread_count()) {
  const std::size_t chains = (count + detail::kChainLength - 1) / detail::kChainLength;
  parallel_for(
      chains,
      [&](std::size_t c) {
        auto rng = detail::chain_rng(seed, c);
        const std::size_t end = std::min(count, (c + 1) * detail::kChainLength);
        for (std::size_t i = c * detail::kChainLength; i < end; ++i) visit(i, draw_matrix(inst, rng));
      },
      threads);
}

inline SampleBatch sample(const Instance& inst, std::size_t count, std::uint64_t seed,
                          unsigned threads = thread_count()) {
  if (count < 1) throw Error(ErrorCode::bad_params, "sample count must be >= 1");
  SampleBatch batch;
  batch.instance_key = inst.descriptor.key;
  batch.count = count;
  batch.seed = seed;
  batch.radial.resize(static_cast<Index>(count), inst.spec.r());
  for_each_draw(
      inst, count, seed,
      [&](std::size_t i, const MatrixXcd& x) { batch.radial.row(static_cast<Index>(i)) = radial_part(inst, x).transpose(); },
      threads);
  return batch;
}

// ---------------------------------------------------------------------------
// Chamber quadrature

enum class Statistic { min_eigenvalue, max_eigenvalue, spacing };

constexpr std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::min_eigenvalue: return "min-eigenvalue";
    case Statistic::max_eigenvalue: return "max-eigenvalue";
    case Statistic::spacing: return "spacing";
  }
  return "unknown";
}

/// Value of the statistic on an ascending chart parameter. The spacing is the
/// gap between the two central entries.
inline double statistic_value(Statistic s, const VectorXd& t) {
  switch (s) {
    case Statistic::min_eigenvalue: return t(0);
    case Statistic::max_eigenvalue: return t(t.size() - 1);
    case Statistic::spacing: {
      if (t.size() < 2) throw Error(ErrorCode::bad_params, "spacing needs at least two radial coordinates");
      const Index c = t.size() / 2;
      return t(c) - t(c - 1);
    }
  }
  return 0.0;
}

/// Tensor trapezoid grid restricted to the strictly ascending chamber, with
/// the masses w_k * density(t_k) held for reuse by CDFs and expectations.
class ChamberQuadrature {
 public:
  using Density = std::function<double(const VectorXd&)>;

  ChamberQuadrature(const Instance& inst, const Density& density, const QuadratureOptions& opts = {},
                    unsigned threads = thread_count())
      : box_(chamber_box(inst.descriptor, opts)), r_(inst.spec.r()), grid_(opts.grid) {
    if (grid_ < 2) throw Error(ErrorCode::bad_params, "quadrature grid needs >= 2 points per axis");
    step_ = box_.periodic ? (box_.hi - box_.lo) / static_cast<double>(grid_)
                          : (box_.hi - box_.lo) / static_cast<double>(grid_ - 1);
    enumerate();
    masses_.assign(count(), 0.0);
    parallel_for(
        count(),
        [&](std::size_t k) {
          const VectorXd t = point(k);
          masses_[k] = weight(k) * density(t);
        },
        threads);
    total_ = 0.0;
    for (double m : masses_) total_ += m;
    if (!(total_ > 0.0) || !std::isfinite(total_))
      throw Error(ErrorCode::quadrature_domain, "chamber quadrature has no positive mass");
    check_tail(opts);
  }

  /// Density that d times the chart density of the instance, on the ordered chamber.
  static Density chart_density(const Instance& inst, const Tolerances& tol = {}) {
    return [&inst, tol](const VectorXd& t) {
      return inst.spec.degree * joint_density(inst.spec, t, PsiMode::analytic, tol).density_chart;
    };
  }

  std::size_t count() const { return indices_.size() / static_cast<std::size_t>(std::max<Index>(r_, 1)); }
  double total_mass() const { return total_; }
  std::size_t grid() const { return grid_; }
  double step() const { return step_; }
  const ChamberBox& box() const { return box_; }

  VectorXd point(std::size_t k) const {
    VectorXd t(r_);
    for (Index a = 0; a < r_; ++a) t(a) = node(index(k, a));
    return t;
  }

  /// ∫ f ρ / ∫ ρ over the chamber.
  double expectation(const std::function<double(const VectorXd&)>& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < count(); ++k)
      if (masses_[k] != 0.0) acc += masses_[k] * f(point(k));
    return acc / total_;
  }

  /// Piecewise-linear CDF of a statistic through its lattice values.
  struct Cdf {
    std::vector<double> x;
    std::vector<double> F;

    double operator()(double v) const {
      if (v <= x.front()) return v < x.front() ? 0.0 : F.front();
      if (v >= x.back()) return 1.0;
      const auto it = std::upper_bound(x.begin(), x.end(), v);
      const std::size_t j = static_cast<std::size_t>(it - x.begin());
      const double w = (v - x[j - 1]) / (x[j] - x[j - 1]);
      return F[j - 1] + w * (F[j] - F[j - 1]);
    }
  };

  /// The lattice masses are turned back into marginal density values and
  /// integrated by the trapezoid rule, so the CDF starts at 0 on the first node.
  Cdf cdf(Statistic s) const {
    if (s == Statistic::spacing && r_ < 2)
      throw Error(ErrorCode::bad_params, "spacing needs at least two radial coordinates");
    std::vector<double> lattice(grid_, 0.0);
    for (std::size_t k = 0; k < count(); ++k) lattice[lattice_index(s, k)] += masses_[k];
    std::vector<double> g(grid_);
    for (std::size_t j = 0; j < grid_; ++j)
      g[j] = lattice[j] / (s == Statistic::spacing ? step_ : axis_weight(j));
    Cdf out;
    for (std::size_t j = 0; j < grid_; ++j) out.x.push_back(s == Statistic::spacing ? step_ * static_cast<double>(j) : node(j));
    if (box_.periodic) {
      // closing node at the period; only the largest entry has mass there
      out.x.push_back(s == Statistic::spacing ? box_.hi - box_.lo : box_.hi);
      g.push_back(s == Statistic::max_eigenvalue && grid_ >= 2 ? std::max(0.0, 2.0 * g[grid_ - 1] - g[grid_ - 2]) : 0.0);
    }
    out.F.assign(out.x.size(), 0.0);
    for (std::size_t j = 1; j < out.x.size(); ++j)
      out.F[j] = out.F[j - 1] + 0.5 * (out.x[j] - out.x[j - 1]) * (g[j - 1] + g[j]);
    const double end = out.F.back();
    if (!(end > 0.0)) throw Error(ErrorCode::quadrature_domain, "statistic has no mass on the lattice");
    for (double& f : out.F) f /= end;
    return out;
  }

 private:
  double node(std::size_t i) const { return box_.lo + step_ * static_cast<double>(i); }
  std::size_t index(std::size_t k, Index a) const { return indices_[k * static_cast<std::size_t>(r_) + a]; }

  double axis_weight(std::size_t i) const {
    if (box_.periodic) return step_;
    return (i == 0 || i + 1 == grid_) ? 0.5 * step_ : step_;
  }

  double weight(std::size_t k) const {
    double w = 1.0;
    for (Index a = 0; a < r_; ++a) w *= axis_weight(index(k, a));
    return w;
  }

  std::size_t lattice_index(Statistic s, std::size_t k) const {
    switch (s) {
      case Statistic::min_eigenvalue: return index(k, 0);
      case Statistic::max_eigenvalue: return index(k, r_ - 1);
      case Statistic::spacing: {
        const Index c = r_ / 2;
        return index(k, c) - index(k, c - 1);
      }
    }
    return 0;
  }

  void enumerate() {
    if (r_ == 0) throw Error(ErrorCode::bad_params, "chamber quadrature needs r >= 1");
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(r_));
    std::iota(idx.begin(), idx.end(), 0u);
    if (idx.back() >= grid_) throw Error(ErrorCode::bad_params, "grid too small for the chamber");
    while (true) {
      indices_.insert(indices_.end(), idx.begin(), idx.end());
      // next strictly increasing tuple, last axis fastest
      Index a = r_ - 1;
      while (a >= 0 && idx[a] == grid_ - static_cast<std::size_t>(r_ - a)) --a;
      if (a < 0) break;
      ++idx[a];
      for (Index b = a + 1; b < r_; ++b) idx[b] = idx[b - 1] + 1;
    }
  }

  void check_tail(const QuadratureOptions& opts) const {
    if (!box_.truncated_lo && !box_.truncated_hi) return;
    const double band = opts.edge_band * (box_.hi - box_.lo);
    double edge = 0.0;
    for (std::size_t k = 0; k < count(); ++k) {
      bool in_band = false;
      for (Index a = 0; a < r_; ++a) {
        const double t = node(index(k, a));
        if ((box_.truncated_lo && t < box_.lo + band) || (box_.truncated_hi && t > box_.hi - band)) in_band = true;
      }
      if (in_band) edge += masses_[k];
    }
    if (edge / total_ > opts.tail_mass)
      throw Error(ErrorCode::quadrature_domain, "truncated box misses an estimated " + std::to_string(edge / total_) +
                                                    " of the mass");
  }

  ChamberBox box_;
  Index r_ = 0;
  std::size_t grid_ = 0;
  double step_ = 0.0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> masses_;
  double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

struct ComparisonReport {
  std::string statistic;
  double ks_distance = 0.0;
  std::size_t sample_count = 0;
  std::size_t grid = 0;
  double threshold = 0.01;
  bool pass = false;
};

inline double ks_distance(std::vector<double> values, const ChamberQuadrature::Cdf& cdf) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    worst = std::max({worst, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(worst, 0.0, 1.0);
}

inline std::vector<double> statistic_values(const SampleBatch& batch, Statistic s) {
  std::vector<double> values(batch.count);
  for (std::size_t i = 0; i < batch.count; ++i)
    values[i] = statistic_value(s, batch.radial.row(static_cast<Index>(i)).transpose());
  return values;
}

inline ComparisonReport ks_compare(const ChamberQuadrature& quad, const SampleBatch& batch, Statistic s,
                                   double threshold = 0.01) {
  ComparisonReport rep;
  rep.statistic = std::string(to_string(s));
  rep.sample_count = batch.count;
  rep.grid = quad.grid();
  rep.threshold = threshold;
  rep.ks_distance = ks_distance(statistic_values(batch, s), quad.cdf(s));
  rep.pass = rep.ks_distance < threshold;
  return rep;
}

/// KS distance of a batch against d times the chart density of the instance.
inline ComparisonReport ks_compare(const Instance& inst, const SampleBatch& batch, Statistic s,
                                   const QuadratureOptions& opts = {}, double threshold = 0.01) {
  if (batch.instance_key != inst.descriptor.key)
    throw Error(ErrorCode::bad_params, "batch was drawn from a different instance");
  const ChamberQuadrature quad(inst, ChamberQuadrature::chart_density(inst), opts);
  return ks_compare(quad, batch, s, threshold);
}

// ---------------------------------------------------------------------------
// Integration identity

enum class TestFunction { tr_x2, tr_x4, tr_exp_neg };

inline TestFunction parse_test_function(std::string_view key) {
  if (key == "tr-x2") return TestFunction::tr_x2;
  if (key == "tr-x4") return TestFunction::tr_x4;
  if (key == "tr-exp-neg") return TestFunction::tr_exp_neg;
  throw Error(ErrorCode::unknown_key, "unknown test function '" + std::string(key) + "'");
}

constexpr std::string_view to_string(TestFunction f) {
  switch (f) {
    case TestFunction::tr_x2: return "tr-x2";
    case TestFunction::tr_x4: return "tr-x4";
    case TestFunction::tr_exp_neg: return "tr-exp-neg";
  }
  return "unknown";
}

/// Invariant test functions. On group manifolds: |tr x|^2, |tr x|^4 and
/// Re tr x. Elsewhere: Re tr x^2, Re tr x^4 and Re tr exp(-x).
inline MatrixFunction test_function(const InstanceDescriptor& d, TestFunction f) {
  const bool group = d.family == Family::compact_group;
  switch (f) {
    case TestFunction::tr_x2:
      if (group) return [](const MatrixXcd& x) { return std::norm(x.trace()); };
      return [](const MatrixXcd& x) { return (x * x).trace().real(); };
    case TestFunction::tr_x4:
      if (group) return [](const MatrixXcd& x) { return std::pow(std::norm(x.trace()), 2); };
      return [](const MatrixXcd& x) {
        const MatrixXcd x2 = x * x;
        return (x2 * x2).trace().real();
      };
    case TestFunction::tr_exp_neg:
      if (group) return [](const MatrixXcd& x) { return x.trace().real(); };
      return [](const MatrixXcd& x) { return expm(-x).trace().real(); };
  }
  throw Error(ErrorCode::unknown_key, "unknown test function");
}

struct IntegrationReport {
  std::string function;
  double lhs = 0.0;           // Monte-Carlo mean of f under p(x) dx
  double rhs = 0.0;           // ∫ f dnu / ∫ dnu over the ordered chamber
  double rel_error = 0.0;
  double standard_error = 0.0;
  double threshold = 0.0;     // relative
  std::size_t sample_count = 0;
  std::size_t grid = 0;
  bool pass = false;
};

inline constexpr double kIntegrationEpsilon = 1e-12;

/// Default acceptance band 3 (stderr / |rhs| + 0.002); a positive
/// `fixed_threshold` replaces it.
inline IntegrationReport integration_check(const Instance& inst, TestFunction fkey, std::size_t count,
                                           std::uint64_t seed, const QuadratureOptions& opts = {},
                                           double fixed_threshold = 0.0, const Tolerances& tol = {},
                                           unsigned threads = thread_count()) {
  if (count < 2) throw Error(ErrorCode::bad_params, "integration check needs N >= 2");
  const MatrixFunction f = test_function(inst.descriptor, fkey);
  {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const double defect = invariance_defect(inst.spec, f, rng);
    if (!(defect < tol.invariance))
      throw Error(ErrorCode::non_invariant_weight, "test function is not invariant (defect " + std::to_string(defect) + ")");
  }
  std::vector<double> values(count);
  for_each_draw(inst, count, seed, [&](std::size_t i, const MatrixXcd& x) { values[i] = f(x); }, threads);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(count - 1);

  const ChamberQuadrature quad(inst, ChamberQuadrature::chart_density(inst, tol), opts, threads);
  const auto& spec = inst.spec;
  const double rhs = quad.expectation([&](const VectorXd& t) { return f(spec.layout().to_matrix(spec.chart.point(t))); });

  IntegrationReport rep;
  rep.function = std::string(to_string(fkey));
  rep.lhs = mean;
  rep.rhs = rhs;
  rep.standard_error = std::sqrt(var / static_cast<double>(count));
  const double denom = std::max(std::abs(rhs), kIntegrationEpsilon);
  rep.rel_error = std::abs(mean - rhs) / denom;
  rep.threshold = fixed_threshold > 0.0 ? fixed_threshold : 3.0 * (rep.standard_error / denom + 0.002);
  rep.sample_count = count;
  rep.grid = quad.grid();
  rep.pass = rep.rel_error < rep.threshold;
  return rep;
}

}  // namespace orbitmeasure
