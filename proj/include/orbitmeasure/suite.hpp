#pragma once

// Deterministic validation suite of one instance: geometric conditions,
// agreement of the Psi modes and of the pullback route, constancy of the
// oracle ratio, gauge invariance and invariance of the weight.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "orbitmeasure/config.hpp"
#include "orbitmeasure/ensemble.hpp"
#include "orbitmeasure/instances.hpp"
#include "orbitmeasure/parallel.hpp"
#include "orbitmeasure/report.hpp"

namespace orbitmeasure {

struct VerifyOptions {
  std::size_t points = 100;         // condition and mode-agreement probes
  std::size_t gauge_points = 20;
  std::size_t pullback_points = 10;
  std::uint64_t seed = 1;
  double mode_agreement = 1e-6;     // relative, analytic vs finite-difference J
  double pullback_agreement = 1e-5; // relative, J vs pullback determinant
  double ratio_cv = 1e-6;           // coefficient of variation of density / oracle
  Tolerances tol;
};

namespace detail {

inline double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

inline CheckRecord max_record(std::string name, const std::vector<double>& values, double threshold) {
  CheckRecord rec{std::move(name), true, 0.0, threshold};
  rec.count = values.size();
  for (double v : values) {
    rec.value = std::max(rec.value, std::isfinite(v) ? v : HUGE_VAL);
    if (!(v < threshold)) ++rec.failures;
  }
  rec.passed = rec.failures == 0;
  return rec;
}

}  // namespace detail

inline ValidationReport verify_instance(const Instance& inst, const VerifyOptions& opts = {},
                                        unsigned threads = thread_count()) {
  const auto& spec = inst.spec;
  const auto& tol = opts.tol;
  ValidationReport report;

  std::mt19937_64 rng(opts.seed);
  std::vector<VectorXd> ts(opts.points);
  for (auto& t : ts) t = spec.chart.draw_regular(rng);

  std::vector<ConditionReport> conditions(ts.size());
  std::vector<double> mode_diff(ts.size()), ratio(ts.size());
  parallel_for(
      ts.size(),
      [&](std::size_t i) {
        conditions[i] = check_conditions(spec, ts[i], tol);
        const auto ev = joint_density(spec, ts[i], PsiMode::analytic, tol);
        const double fd = jacobian_factor(spec, ts[i], PsiMode::finite_difference, tol);
        mode_diff[i] = detail::relative_difference(ev.J, fd);
        ratio[i] = inst.descriptor.has_oracle ? ev.density / oracle_density(inst.descriptor, ts[i]) : 0.0;
      },
      threads);
  append_condition_records(report, conditions, tol);
  report.add(detail::max_record("psi-mode-agreement", mode_diff, opts.mode_agreement));

  CheckRecord oracle{"oracle-ratio-cv", false, 0.0, opts.ratio_cv};
  oracle.count = ratio.size();
  if (!inst.descriptor.has_oracle) {
    oracle.skipped = true;
    oracle.detail = "no closed-form density registered";
  } else if (!ratio.empty()) {
    double mean = 0.0;
    for (double v : ratio) mean += v;
    mean /= static_cast<double>(ratio.size());
    double var = 0.0;
    for (double v : ratio) var += (v - mean) * (v - mean);
    var /= static_cast<double>(ratio.size());
    oracle.value = mean != 0.0 ? std::sqrt(var) / std::abs(mean) : HUGE_VAL;
    oracle.passed = oracle.value < opts.ratio_cv;
    oracle.failures = oracle.passed ? 0 : 1;
    char buf[64];
    std::snprintf(buf, sizeof buf, "mean ratio %.17g", mean);
    oracle.detail = buf;
  }
  report.add(oracle);

  std::vector<MatrixXcd> gs(opts.gauge_points);
  std::vector<VectorXd> gauge_ts(opts.gauge_points);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    gs[i] = random_group_element(spec.group, rng);
    gauge_ts[i] = spec.chart.draw_regular(rng);
  }
  std::vector<double> gauge(gs.size());
  parallel_for(gs.size(), [&](std::size_t i) { gauge[i] = gauge_invariance_check(spec, gs[i], gauge_ts[i], tol); },
               threads);
  report.add(detail::max_record("gauge-invariance", gauge, tol.gauge));

  const std::size_t pb_count = std::min(opts.pullback_points, ts.size());
  std::vector<double> pullback(pb_count);
  const MatrixXcd e = MatrixXcd::Identity(spec.layout().size, spec.layout().size);
  parallel_for(
      pb_count,
      [&](std::size_t i) {
        pullback[i] = detail::relative_difference(jacobian_factor(spec, ts[i], PsiMode::analytic, tol),
                                                  pullback_jacobian(spec, e, ts[i], tol));
      },
      threads);
  report.add(detail::max_record("pullback-agreement", pullback, opts.pullback_agreement));

  const double defect = invariance_defect(spec, spec.weight, rng);
  CheckRecord weight{"weight-invariance", defect < tol.invariance, defect, tol.invariance};
  weight.failures = weight.passed ? 0 : 1;
  report.add(weight);
  return report;
}

}  // namespace orbitmeasure
