#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orbitmeasure/instances.hpp"

using namespace orbitmeasure;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ErrorCode code_of(std::string_view key, InstanceParams p) {
  try {
    build_instance(key, p);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal_error;
}

double ratio_cv(const std::vector<double>& r) {
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(r.size())) / std::abs(mean);
}

}  // namespace

TEST(Registry, KeysAndUnknownKey) {
  EXPECT_EQ(instance_keys().size(), 8u);
  EXPECT_EQ(code_of("gaussian-beta3", {2}), ErrorCode::unknown_key);
}

TEST(Registry, GueDimensions) {
  const auto spec = build_instance("gaussian-beta2", {2});
  EXPECT_EQ(spec.x_dim, 4);
  EXPECT_EQ(spec.dim_l(), 2);
  EXPECT_EQ(spec.r(), 2);
  EXPECT_EQ(spec.degree, 2);
}

TEST(Registry, GoeOneByOne) {
  const auto spec = build_instance("gaussian-beta1", {1});
  EXPECT_EQ(spec.dim_l(), 0);
  EXPECT_EQ(jacobian_factor(spec, vec({0.7})), 1.0);
}

TEST(Registry, DimensionCounts) {
  for (int n = 1; n <= 4; ++n) {
    EXPECT_EQ(build_instance("gaussian-beta1", {n}).x_dim, n * (n + 1) / 2);
    EXPECT_EQ(build_instance("gaussian-beta2", {n}).x_dim, n * n);
    EXPECT_EQ(build_instance("gaussian-beta4", {n}).x_dim, n * (2 * n - 1));
    EXPECT_EQ(build_instance("spd-wishart", {n}).x_dim, n * (n + 1) / 2);
    EXPECT_EQ(build_instance("unitary-group", {n}).x_dim, n * n);
    EXPECT_EQ(build_instance("algebra-u", {n}).x_dim, n * n);
  }
  EXPECT_EQ(build_instance("su2-group", {2}).x_dim, 3);
  EXPECT_EQ(build_instance("chiral-beta2", {2, 3}).x_dim, 12);
}

TEST(Registry, BadParams) {
  EXPECT_EQ(code_of("spd-wishart", {2, 1}), ErrorCode::bad_params);
  EXPECT_EQ(code_of("gaussian-beta2", {0}), ErrorCode::bad_params);
  EXPECT_EQ(code_of("su2-group", {3}), ErrorCode::bad_params);
  EXPECT_EQ(code_of("chiral-beta2", {3, 2}), ErrorCode::bad_params);
}

TEST(Registry, ChartDomain) {
  const auto spec = build_instance("spd-wishart", {2});
  try {
    spec.chart.point(vec({-1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::chart_domain);
  }
  EXPECT_THROW(spec.chart.point(vec({1, 2, 3})), Error);
}

TEST(Oracle, GueValue) { EXPECT_NEAR(oracle_density("gaussian-beta2", {2}, vec({0, 1})), std::exp(-0.5), 1e-15); }

TEST(Oracle, UnitaryValue) {
  EXPECT_NEAR(oracle_density("unitary-group", {2}, vec({0, std::numbers::pi})), 4.0, 1e-14);
}

TEST(Oracle, OneByOneIsWeightOnly) {
  EXPECT_NEAR(oracle_density("gaussian-beta1", {1}, vec({1.0})), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(oracle_density("unitary-group", {1}, vec({1.0})), 1.0, 1e-15);
  EXPECT_NEAR(oracle_density("spd-wishart", {1, 3}, vec({2.0})), std::sqrt(2.0) * std::exp(-1.0), 1e-15);
}

TEST(Oracle, ChiralHasNone) {
  try {
    oracle_density("chiral-beta2", {2}, vec({1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_oracle);
  }
}

TEST(Degree, DeclaredValues) {
  EXPECT_EQ(declared_degree("gaussian-beta2", 3), 6);
  EXPECT_EQ(declared_degree("su2-group", 2), 2);
  for (const auto& key : instance_keys())
    if (key != "su2-group") EXPECT_EQ(declared_degree(key, 1), 1) << key;
}

// joint_density / oracle_density is constant; under C = 1 it equals 1 for
// the instances with a classical normalization.
TEST(Oracle, MasterFormulaEquivalence) {
  struct Case {
    const char* key;
    int lo, hi;
    bool unit;
  };
  const Case cases[] = {{"gaussian-beta1", 2, 5, true}, {"gaussian-beta2", 2, 5, true},
                        {"algebra-u", 2, 4, true},      {"unitary-group", 2, 4, true},
                        {"su2-group", 2, 2, false},     {"gaussian-beta4", 2, 3, false},
                        {"spd-wishart", 2, 3, false}};
  for (const auto& c : cases)
    for (int n = c.lo; n <= c.hi; ++n) {
      const InstanceParams p{n};
      const auto spec = build_instance(c.key, p);
      const auto desc = describe(c.key, p);
      std::mt19937_64 rng(31 + n);
      std::vector<double> ratios;
      for (int i = 0; i < 50; ++i) {
        const VectorXd t = spec.chart.draw_regular(rng);
        ratios.push_back(joint_density(spec, t).density / oracle_density(desc, t));
      }
      EXPECT_LT(ratio_cv(ratios), 1e-6) << c.key << " n=" << n;
      if (c.unit) EXPECT_NEAR(ratios.front(), 1.0, 1e-6) << c.key << " n=" << n;
    }
}

TEST(Chiral, RatioAgainstBesselFreeForm) {
  // p x q block Gaussian: prod (s_i^2 - s_j^2)^2 prod s_i^{2(q-p)+1} e^{-sum s^2}
  const int p = 2, q = 3;
  const auto spec = build_instance("chiral-beta2", {p, q});
  std::mt19937_64 rng(8);
  std::vector<double> ratios;
  for (int i = 0; i < 50; ++i) {
    const VectorXd s = spec.chart.draw_regular(rng);
    double ref = std::pow(s(0) * s(0) - s(1) * s(1), 2);
    for (Index a = 0; a < p; ++a) ref *= std::pow(s(a), 2 * (q - p) + 1) * std::exp(-s(a) * s(a));
    ratios.push_back(joint_density(spec, s).density_chart / ref);
  }
  EXPECT_LT(ratio_cv(ratios), 1e-6);
}

TEST(Chamber, Boxes) {
  const QuadratureOptions q;
  const auto g = chamber_box(describe("gaussian-beta2", {2}), q);
  EXPECT_EQ(g.lo, -8.0);
  EXPECT_EQ(g.hi, 8.0);
  const auto u = chamber_box(describe("unitary-group", {2}), q);
  EXPECT_TRUE(u.periodic);
  EXPECT_NEAR(u.hi, 2.0 * std::numbers::pi, 1e-15);
  EXPECT_EQ(chamber_box(describe("spd-wishart", {2}), q).hi, 60.0);
}
