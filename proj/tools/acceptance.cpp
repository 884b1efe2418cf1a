// Acceptance gate: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Usage: acceptance <path-to-orbitmeasure-cli>

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "orbitmeasure/orbitmeasure.hpp"

using namespace orbitmeasure;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add(Outcome& o, bool ok, const std::string& what) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what + (ok ? "" : " [fail]");
}

// 1. joint_density / oracle is constant (CV < 1e-6 over 50 points) and equals 1 for
// the first four families; total runtime < 30 s.
Outcome master_formula() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    const char* key;
    int lo, hi;
    bool unit;
  };
  const Case cases[] = {{"gaussian-beta1", 2, 5, true},
                        {"gaussian-beta2", 2, 5, true},
                        {"algebra-u", 2, 4, true},
                        {"unitary-group", 2, 4, true},
                        {"su2-group", 2, 2, false}};
  double worst_cv = 0.0, worst_unit = 0.0;
  for (const auto& c : cases)
    for (int n = c.lo; n <= c.hi; ++n) {
      const auto inst = make_instance(c.key, {n});
      std::mt19937_64 rng(1000 + n);
      std::vector<double> ratio;
      for (int i = 0; i < 50; ++i) {
        const VectorXd t = inst.spec.chart.draw_regular(rng);
        ratio.push_back(joint_density(inst.spec, t).density / oracle_density(inst.descriptor, t));
      }
      double mean = 0.0, var = 0.0;
      for (double r : ratio) mean += r;
      mean /= static_cast<double>(ratio.size());
      for (double r : ratio) var += (r - mean) * (r - mean);
      const double cv = std::sqrt(var / static_cast<double>(ratio.size())) / std::abs(mean);
      worst_cv = std::max(worst_cv, cv);
      if (c.unit) worst_unit = std::max(worst_unit, std::abs(mean - 1.0));
    }
  const double dt = seconds_since(t0);
  add(o, worst_cv < 1e-6, "max cv " + fmt("%.2e", worst_cv) + " < 1e-6");
  add(o, worst_unit < 1e-6, "max |C-1| " + fmt("%.2e", worst_unit) + " < 1e-6");
  add(o, dt < 30.0, "runtime " + fmt("%.1f", dt) + " s < 30 s");
  return o;
}

// 2. J(c t) = c^{beta n(n-1)/2} J(t), n = 3, 20 draws per Gaussian instance.
Outcome beta_scaling() {
  Outcome o;
  double worst = 0.0;
  std::mt19937_64 rng(2000);
  std::uniform_real_distribution<double> scale(0.25, 4.0);
  for (const char* key : {"gaussian-beta1", "gaussian-beta2", "gaussian-beta4"}) {
    const auto inst = make_instance(key, {3});
    const double power = inst.descriptor.beta * 3.0;
    for (int i = 0; i < 20; ++i) {
      const double c = scale(rng);
      const VectorXd t = inst.spec.chart.draw_regular(rng);
      worst = std::max(worst, rel(jacobian_factor(inst.spec, c * t), std::pow(c, power) * jacobian_factor(inst.spec, t)));
    }
  }
  add(o, worst < 1e-8, "max rel " + fmt("%.2e", worst) + " < 1e-8");
  return o;
}

// 3. jacobian_factor vs pullback determinant at ([e], y), 50 points, GUE n = 2, 3; < 60 s.
Outcome two_routes() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n : {2, 3}) {
    const auto inst = make_instance("gaussian-beta2", {n});
    const MatrixXcd e = MatrixXcd::Identity(n, n);
    std::mt19937_64 rng(3000 + n);
    for (int i = 0; i < 50; ++i) {
      const VectorXd t = inst.spec.chart.draw_regular(rng);
      worst = std::max(worst, rel(jacobian_factor(inst.spec, t), pullback_jacobian(inst.spec, e, t)));
    }
  }
  const double dt = seconds_since(t0);
  add(o, worst < 1e-5, "max rel " + fmt("%.2e", worst) + " < 1e-5");
  add(o, dt < 60.0, "runtime " + fmt("%.1f", dt) + " s < 60 s");
  return o;
}

// 4. Gauge residual at 20 random (g, y), GUE and U(2).
Outcome gauge() {
  Outcome o;
  double worst = 0.0;
  for (const char* key : {"gaussian-beta2", "unitary-group"}) {
    const auto inst = make_instance(key, {2});
    std::mt19937_64 rng(4000);
    for (int i = 0; i < 20; ++i) {
      const MatrixXcd g = random_group_element(inst.spec.group, rng);
      const VectorXd t = inst.spec.chart.draw_regular(rng);
      worst = std::max(worst, gauge_invariance_check(inst.spec, g, t));
    }
  }
  add(o, worst < 1e-5, "max residual " + fmt("%.2e", worst) + " < 1e-5");
  return o;
}

// 5. check_conditions at 100 random regular points per instance, n <= 3.
Outcome conditions() {
  Outcome o;
  std::size_t total = 0, failed = 0;
  double worst_orth = 0.0;
  for (const auto& key : instance_keys())
    for (int n = 1; n <= 3; ++n) {
      if (key == "su2-group" && n != 2) continue;
      const auto inst = make_instance(key, {n});
      std::mt19937_64 rng(5000 + n);
      for (int i = 0; i < 100; ++i) {
        const auto rep = check_conditions(inst.spec, inst.spec.chart.draw_regular(rng));
        ++total;
        if (rep.in_y_z || !rep.all_conditions()) ++failed;
        worst_orth = std::max(worst_orth, rep.orthogonality);
      }
    }
  add(o, failed == 0, std::to_string(total - failed) + "/" + std::to_string(total) + " points pass");
  add(o, worst_orth < 1e-8, "max orthogonality " + fmt("%.2e", worst_orth) + " < 1e-8");
  return o;
}

// 6. KS < 0.01 at N = 1e5; beta + 1 negative control > 0.05; < 3 min per instance.
Outcome monte_carlo_law() {
  Outcome o;
  struct Case {
    const char* key;
    InstanceParams params;
    std::vector<Statistic> stats;
    bool control;
  };
  const std::vector<Case> cases = {
      {"gaussian-beta1", {2}, {Statistic::max_eigenvalue, Statistic::spacing}, true},
      {"gaussian-beta2", {2}, {Statistic::max_eigenvalue, Statistic::spacing}, true},
      {"spd-wishart", {2, 3}, {Statistic::max_eigenvalue}, false},
      {"su2-group", {2}, {Statistic::max_eigenvalue}, false},
      {"unitary-group", {2}, {Statistic::max_eigenvalue}, false},
  };
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto inst = make_instance(c.key, c.params);
    const ChamberQuadrature quad(inst, ChamberQuadrature::chart_density(inst));
    const auto batch = sample(inst, 100000, 6000);
    for (auto s : c.stats) {
      const auto rep = ks_compare(quad, batch, s);
      add(o, rep.ks_distance < 0.01,
          std::string(c.key) + " " + rep.statistic + " ks " + fmt("%.4f", rep.ks_distance) + " < 0.01");
    }
    if (c.control) {
      InstanceDescriptor wrong = inst.descriptor;
      wrong.beta += 1;
      const ChamberQuadrature bad(inst, [&](const VectorXd& t) { return oracle_density(wrong, t); });
      const auto rep = ks_compare(bad, batch, Statistic::spacing);
      add(o, rep.ks_distance > 0.05, std::string(c.key) + " beta+1 control ks " + fmt("%.4f", rep.ks_distance) + " > 0.05");
    }
    const double dt = seconds_since(t0);
    add(o, dt < 180.0, std::string(c.key) + " " + fmt("%.1f", dt) + " s < 180 s");
  }
  return o;
}

// 7. Ratio-form integration identity at N = 2e5, rel-error < 1%; rhs against the
// exact values 4 and 1; < 2 min.
Outcome integration() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto gue = integration_check(make_instance("gaussian-beta2", {2}), TestFunction::tr_x2, 200000, 7000);
  add(o, gue.rel_error < 0.01, "gue tr x^2 rel " + fmt("%.2e", gue.rel_error) + " < 1e-2");
  add(o, std::abs(gue.rhs - 4.0) < 1e-6, "gue rhs " + fmt("%.9f", gue.rhs) + " vs 4");
  const auto su2 = integration_check(make_instance("su2-group", {2}), TestFunction::tr_x2, 200000, 7001);
  add(o, su2.rel_error < 0.01, "su2 |tr x|^2 rel " + fmt("%.2e", su2.rel_error) + " < 1e-2");
  add(o, std::abs(su2.rhs - 1.0) < 1e-6, "su2 rhs " + fmt("%.9f", su2.rhs) + " vs 1");
  const double dt = seconds_since(t0);
  add(o, dt < 120.0, "runtime " + fmt("%.1f", dt) + " s < 120 s");
  return o;
}

// 8. J = 0 within 1e-10 at repeated parameters; flagged in Y_z without failing.
Outcome degenerate() {
  Outcome o;
  const std::vector<std::pair<const char*, std::vector<double>>> cases = {
      {"gaussian-beta1", {0.5, 0.5}},       {"gaussian-beta1", {-1, 0.2, 0.2}},
      {"gaussian-beta2", {1, 1}},           {"gaussian-beta2", {0.3, 0.3, 0.3}},
      {"gaussian-beta4", {0.7, 0.7}},       {"gaussian-beta4", {-0.4, -0.4, 1}},
      {"spd-wishart", {2, 2}},              {"spd-wishart", {1, 3, 3}},
      {"unitary-group", {1, 1}},            {"unitary-group", {0.5, 2, 2}},
      {"su2-group", {0}},                   {"su2-group", {std::numbers::pi}},
      {"algebra-u", {0.3, 0.3}},            {"chiral-beta2", {1.2, 1.2}},
  };
  double worst = 0.0;
  std::size_t flagged = 0;
  bool suite_ok = true;
  for (const auto& [key, values] : cases) {
    const VectorXd t = Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
    const int n = std::string(key) == "su2-group" ? 2 : static_cast<int>(values.size());
    const auto inst = make_instance(key, {n});
    worst = std::max(worst, jacobian_factor(inst.spec, t));
    const auto rep = check_conditions(inst.spec, t);
    if (rep.in_y_z) ++flagged;
    ValidationReport report;
    append_condition_records(report, {rep});
    suite_ok = suite_ok && rep.passed() && report.passed();
  }
  add(o, worst <= 1e-10, "max J " + fmt("%.2e", worst) + " <= 1e-10");
  add(o, flagged == cases.size(), std::to_string(flagged) + "/" + std::to_string(cases.size()) + " flagged in Y_z");
  add(o, suite_ok, "suite passes with flagged points");
  return o;
}

struct Captured {
  int status = -1;
  std::string out;
};

Captured capture(const std::string& cmd) {
  Captured c;
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return c;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) c.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

// 9. verify / sample / integrate twice with fixed seeds: byte-identical output.
Outcome determinism(const std::string& cli) {
  Outcome o;
  if (cli.empty()) {
    add(o, false, "no CLI path given");
    return o;
  }
  const char* runs[] = {"verify gaussian-beta2 --n 2 --seed 11", "verify unitary-group --n 2 --seed 11",
                        "sample gaussian-beta1 --n 3 --N 5000 --seed 11",
                        "sample unitary-group --n 2 --N 5000 --seed 11",
                        "integrate su2-group --N 50000 --seed 11",
                        "integrate gaussian-beta2 --n 2 --N 50000 --seed 11"};
  for (const char* args : runs) {
    const auto a = capture(cli + " " + args);
    const auto b = capture(cli + " " + args);
    const bool same = a.status == b.status && a.status >= 0 && !a.out.empty() && a.out == b.out;
    add(o, same, std::string(args) + " (" + std::to_string(a.out.size()) + " bytes)");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"master-formula oracle equivalence", master_formula},
      {"beta-scaling law", beta_scaling},
      {"two-route consistency", two_routes},
      {"gauge invariance", gauge},
      {"condition suite", conditions},
      {"Monte-Carlo law", monte_carlo_law},
      {"integration identity", integration},
      {"degenerate behavior", degenerate},
      {"determinism", [&] { return determinism(cli); }},
  };
  bool all = true;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d %s: %s (%s)\n", index, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
