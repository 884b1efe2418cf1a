// Command-line front end: instance dimensions, density grids, validation
// suites, radial samples and integration checks.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orbitmeasure/orbitmeasure.hpp"

namespace om = orbitmeasure;
using json = nlohmann::ordered_json;

namespace {

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct RunConfig {
  std::string command;
  std::string key;
  int n = 2;
  int m = 0;
  std::optional<int> beta;
  std::vector<std::string> grid;
  std::size_t N = 100000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  std::string function = "tr-x2";
  std::size_t points = 100;
  std::size_t gauge_points = 20;
  om::Tolerances tol;
  om::QuadratureOptions quad;
  double mode_agreement = 1e-6;
  double pullback_agreement = 1e-5;
  double ratio_cv = 1e-6;
  double integration_threshold = 0.0;
};

/// Error in the run configuration; exit status 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Axis parse_axis(const std::string& text) {
  const auto first = text.find(':');
  const auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
  if (second == std::string::npos) throw ConfigError("grid axis '" + text + "' is not min:max:count");
  Axis a;
  auto parse = [&](std::string_view s, auto& v) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("grid axis '" + text + "' is not min:max:count");
  };
  const std::string_view sv(text);
  parse(sv.substr(0, first), a.lo);
  parse(sv.substr(first + 1, second - first - 1), a.hi);
  parse(sv.substr(second + 1), a.count);
  if (a.count < 2) throw ConfigError("grid axis '" + text + "' needs count >= 2");
  return a;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json header(const RunConfig& cfg, const om::InstanceDescriptor& d) {
  json j;
  j["schema"] = "1";
  j["command"] = cfg.command;
  j["instance"] = d.key;
  j["params"] = {{"n", d.n}, {"m", d.m}, {"beta", d.beta}};
  return j;
}

std::string csv_header(const std::vector<std::string>& columns) {
  std::string line;
  for (std::size_t i = 0; i < columns.size(); ++i) line += (i ? "," : "") + columns[i];
  return line + "\n";
}

std::string csv_row(const std::vector<double>& values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) line += (i ? "," : "") + number(values[i]);
  return line + "\n";
}

std::vector<std::string> radial_columns(om::Index r) {
  std::vector<std::string> cols;
  for (om::Index i = 0; i < r; ++i) cols.push_back("t" + std::to_string(i + 1));
  return cols;
}

std::string resolve_format(const RunConfig& cfg, const char* fallback) {
  const std::string f = cfg.format.empty() ? fallback : cfg.format;
  if (f != "csv" && f != "json") throw ConfigError("unknown format '" + f + "'");
  return f;
}

// --- subcommands -----------------------------------------------------------

int run_info(const RunConfig&, const om::Instance& inst, std::string& out) {
  json j;
  j["dimX"] = inst.spec.x_dim;
  j["dimL"] = inst.spec.dim_l();
  j["r"] = inst.spec.r();
  j["d"] = inst.spec.degree;
  out = j.dump() + "\n";
  return 0;
}

int run_density(const RunConfig& cfg, const om::Instance& inst, std::string& out) {
  const om::Index r = inst.spec.r();
  if (cfg.grid.empty()) throw ConfigError("density needs --grid min:max:count");
  std::vector<Axis> axes;
  for (const auto& g : cfg.grid) axes.push_back(parse_axis(g));
  if (axes.size() == 1) axes.resize(static_cast<std::size_t>(r), axes.front());
  if (axes.size() != static_cast<std::size_t>(r))
    throw ConfigError("density needs one --grid per chart axis (r = " + std::to_string(r) + ") or a single shared one");

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.count;
  std::vector<std::vector<double>> rows(total);
  om::parallel_for(total, [&](std::size_t k) {
    om::VectorXd t(r);
    std::size_t rest = k;
    for (om::Index a = r - 1; a >= 0; --a) {
      const Axis& ax = axes[static_cast<std::size_t>(a)];
      const std::size_t i = rest % ax.count;
      rest /= ax.count;
      t(a) = ax.lo + (ax.hi - ax.lo) * static_cast<double>(i) / static_cast<double>(ax.count - 1);
    }
    const auto ev = om::joint_density(inst.spec, t, om::PsiMode::analytic, cfg.tol);
    std::vector<double> row(t.data(), t.data() + r);
    row.insert(row.end(), {ev.J, ev.p, ev.density, ev.density_chart});
    rows[k] = std::move(row);
  });

  auto cols = radial_columns(r);
  cols.insert(cols.end(), {"J", "p", "density_intrinsic", "density_chart"});
  if (resolve_format(cfg, "csv") == "csv") {
    out = csv_header(cols);
    for (const auto& row : rows) out += csv_row(row);
  } else {
    json j = header(cfg, inst.descriptor);
    j["columns"] = cols;
    j["rows"] = json::array();
    for (const auto& row : rows) {
      json jr = json::array();
      for (double v : row) jr.push_back(number_json(v));
      j["rows"].push_back(jr);
    }
    out = j.dump(2) + "\n";
  }
  return 0;
}

int run_verify(const RunConfig& cfg, const om::Instance& inst, std::string& out) {
  om::VerifyOptions opts;
  opts.points = cfg.points;
  opts.gauge_points = cfg.gauge_points;
  opts.seed = cfg.seed;
  opts.mode_agreement = cfg.mode_agreement;
  opts.pullback_agreement = cfg.pullback_agreement;
  opts.ratio_cv = cfg.ratio_cv;
  opts.tol = cfg.tol;
  const auto report = om::verify_instance(inst, opts);

  if (resolve_format(cfg, "json") == "csv") {
    out = csv_header({"name", "passed", "skipped", "value", "threshold", "count", "failures"});
    for (const auto& c : report.checks)
      out += c.name + "," + (c.passed ? "1" : "0") + "," + (c.skipped ? "1" : "0") + "," + number(c.value) + "," +
             number(c.threshold) + "," + std::to_string(c.count) + "," + std::to_string(c.failures) + "\n";
  } else {
    json j = header(cfg, inst.descriptor);
    j["seed"] = cfg.seed;
    j["passed"] = report.passed();
    j["checks"] = json::array();
    for (const auto& c : report.checks) {
      j["checks"].push_back({{"name", c.name},
                             {"passed", c.passed},
                             {"skipped", c.skipped},
                             {"value", number_json(c.value)},
                             {"threshold", c.threshold},
                             {"count", c.count},
                             {"failures", c.failures},
                             {"detail", c.detail}});
    }
    out = j.dump(2) + "\n";
  }
  return report.passed() ? 0 : 1;
}

int run_sample(const RunConfig& cfg, const om::Instance& inst, std::string& out) {
  if (cfg.N < 1) throw ConfigError("--N must be >= 1");
  const auto batch = om::sample(inst, cfg.N, cfg.seed);
  const om::Index r = batch.radial.cols();
  if (resolve_format(cfg, "csv") == "csv") {
    std::ostringstream os;
    os << csv_header(radial_columns(r));
    for (om::Index i = 0; i < batch.radial.rows(); ++i) {
      const om::VectorXd row = batch.radial.row(i).transpose();
      os << csv_row(std::vector<double>(row.data(), row.data() + r));
    }
    out = os.str();
  } else {
    json j = header(cfg, inst.descriptor);
    j["seed"] = cfg.seed;
    j["count"] = batch.count;
    j["samples"] = json::array();
    for (om::Index i = 0; i < batch.radial.rows(); ++i) {
      json jr = json::array();
      for (om::Index a = 0; a < r; ++a) jr.push_back(batch.radial(i, a));
      j["samples"].push_back(jr);
    }
    out = j.dump(2) + "\n";
  }
  return 0;
}

int run_integrate(const RunConfig& cfg, const om::Instance& inst, std::string& out) {
  if (cfg.N < 2) throw ConfigError("--N must be >= 2 for integrate");
  const auto fkey = om::parse_test_function(cfg.function);
  const auto rep = om::integration_check(inst, fkey, cfg.N, cfg.seed, cfg.quad, cfg.integration_threshold, cfg.tol);
  if (resolve_format(cfg, "json") == "csv") {
    out = csv_header({"function", "lhs", "rhs", "rel_error", "standard_error", "threshold", "N", "grid", "passed"});
    out += rep.function + "," + number(rep.lhs) + "," + number(rep.rhs) + "," + number(rep.rel_error) + "," +
           number(rep.standard_error) + "," + number(rep.threshold) + "," + std::to_string(rep.sample_count) + "," +
           std::to_string(rep.grid) + "," + (rep.pass ? "1" : "0") + "\n";
  } else {
    json j = header(cfg, inst.descriptor);
    j["seed"] = cfg.seed;
    j["function"] = rep.function;
    j["N"] = rep.sample_count;
    j["grid"] = rep.grid;
    j["lhs"] = number_json(rep.lhs);
    j["rhs"] = number_json(rep.rhs);
    j["rel_error"] = number_json(rep.rel_error);
    j["standard_error"] = number_json(rep.standard_error);
    j["threshold"] = number_json(rep.threshold);
    j["passed"] = rep.pass;
    out = j.dump(2) + "\n";
  }
  return rep.pass ? 0 : 1;
}

void add_tolerance_flags(CLI::App& app, RunConfig& cfg) {
  auto& t = cfg.tol;
  app.add_option("--tol-span", t.span_residual, "coordinate residual inside a space");
  app.add_option("--tol-clamp", t.clamp, "roundoff band for Gram determinants");
  app.add_option("--tol-fd-step", t.fd_step, "finite-difference step");
  app.add_option("--tol-rank", t.rank, "relative singular value cut");
  app.add_option("--tol-gap", t.gap, "regularity gap");
  app.add_option("--tol-orthogonality", t.orthogonality, "relative orthogonality residual");
  app.add_option("--tol-gauge", t.gauge, "gauge invariance residual");
  app.add_option("--tol-invariance", t.invariance, "weight and test-function invariance defect");
  app.add_option("--tol-mode", cfg.mode_agreement, "analytic vs finite-difference J");
  app.add_option("--tol-pullback", cfg.pullback_agreement, "J vs pullback determinant");
  app.add_option("--tol-ratio", cfg.ratio_cv, "coefficient of variation of density / oracle");
  app.add_option("--tol-integration", cfg.integration_threshold, "fixed relative threshold (0: statistical band)");
  app.add_option("--tol-tail", cfg.quad.tail_mass, "accepted quadrature truncation loss");
}

int execute(RunConfig& cfg) {
  if (cfg.beta) {
    const auto d = om::describe(cfg.key, {cfg.n, cfg.m});
    if (*cfg.beta != d.beta)
      throw ConfigError("--beta " + std::to_string(*cfg.beta) + " does not match " + d.key + " (beta = " +
                        std::to_string(d.beta) + ")");
  }
  const om::Instance inst = om::make_instance(cfg.key, {cfg.n, cfg.m});
  std::string out;
  int status = 0;
  if (cfg.command == "info") status = run_info(cfg, inst, out);
  else if (cfg.command == "density") status = run_density(cfg, inst, out);
  else if (cfg.command == "verify") status = run_verify(cfg, inst, out);
  else if (cfg.command == "sample") status = run_sample(cfg, inst, out);
  else status = run_integrate(cfg, inst, out);

  if (cfg.out.empty()) {
    std::cout << out << std::flush;
  } else {
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) throw ConfigError("cannot open output file '" + cfg.out + "'");
    file << out;
    if (!file) throw std::runtime_error("failed writing '" + cfg.out + "'");
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Joint eigenvalue densities of random-matrix ensembles from group orbits", "orbitmeasure"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML file with option defaults (flags take precedence)");

  app.add_option("--n", cfg.n, "matrix size (p for chiral-beta2)");
  app.add_option("--m", cfg.m, "Wishart degrees of freedom, or q for chiral-beta2 (0: default)");
  app.add_option("--beta", cfg.beta, "Dyson index; must match the instance key");
  app.add_option("--grid", cfg.grid, "axis range min:max:count; once per chart axis or once for all");
  app.add_option("--N", cfg.N, "number of draws");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--out", cfg.out, "output file (default: standard output)");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--function", cfg.function, "integrate test function: tr-x2, tr-x4, tr-exp-neg");
  app.add_option("--points", cfg.points, "verify: number of random regular points");
  app.add_option("--gauge-points", cfg.gauge_points, "verify: number of gauge probes");
  app.add_option("--quad-grid", cfg.quad.grid, "quadrature points per chamber axis");
  app.add_option("--gaussian-box", cfg.quad.gaussian_box, "quadrature box half-width for Gaussian charts");
  app.add_option("--wishart-box", cfg.quad.wishart_box, "quadrature upper edge for the SPD chart");
  add_tolerance_flags(app, cfg);

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"info", "print dim X, dim l, r and the covering degree as json"},
      {"density", "evaluate J, p and the joint density over a grid of chart parameters"},
      {"verify", "run the geometric and numerical validation suite"},
      {"sample", "draw ordered radial samples"},
      {"integrate", "check the radial integration identity for an invariant function"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("instance", cfg.key, "instance key")->required();
    sub->callback([&cfg, name = std::string(name)] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "orbitmeasure: " << e.what() << "\n";
    return 2;
  }

  try {
    return execute(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "orbitmeasure: " << e.what() << "\n";
    return 2;
  } catch (const om::Error& e) {
    std::cerr << "orbitmeasure: " << e.what() << "\n";
    const bool runtime = e.code() == om::ErrorCode::internal_error || e.code() == om::ErrorCode::non_finite;
    return runtime ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "orbitmeasure: " << e.what() << "\n";
    return 1;
  }
}
