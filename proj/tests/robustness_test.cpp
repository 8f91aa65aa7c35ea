#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "etstl/formula.hpp"
#include "etstl/robustness.hpp"
#include "oracles.hpp"

using namespace etstl;

namespace {

Conjunction body(const char* text) {
  return std::get<AtomSequence>(parse_formula(text)).atoms[0].body;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), x.data());
  return x;
}

// Distance from x to the nearest point where some leaf is not differentiable.
double kink_distance(const Conjunction& psi, const Vector& x) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& lit : psi.literals) {
    if (auto* b = std::get_if<BallPredicate>(&lit.predicate)) {
      d = std::min(d, b->radius - oracle::leaf(*b, x));
    } else if (auto* j = std::get_if<JoinPredicate>(&lit.predicate)) {
      d = std::min(d, j->radius - oracle::leaf(*j, x));
    } else if (auto* w = std::get_if<BandPredicate>(&lit.predicate)) {
      d = std::min(d, std::abs(x[w->index] - w->center));
    }
  }
  return d;
}

}  // namespace

TEST(Predicate, BallAtCenterHasZeroGradient) {
  BallPredicate b{{0, 1}, vec({20, 30}), 10};
  auto vg = predicate_value_and_grad(b, vec({20, 30, 0}));
  EXPECT_DOUBLE_EQ(vg.value, 10.0);
  EXPECT_EQ(vg.grad.size(), 3);
  EXPECT_EQ(vg.grad.norm(), 0.0);
}

TEST(Predicate, BallOnBoundary) {
  BallPredicate b{{0, 1}, vec({20, 30}), 10};
  auto vg = predicate_value_and_grad(b, vec({26, 38, 5}));
  EXPECT_NEAR(vg.value, 0.0, 1e-15);
  EXPECT_NEAR(vg.grad[0], -0.6, 1e-15);
  EXPECT_NEAR(vg.grad[1], -0.8, 1e-15);
  EXPECT_EQ(vg.grad[2], 0.0);
}

TEST(Predicate, JoinAtCoincidenceHasZeroGradient) {
  JoinPredicate j{{0, 1}, {2, 3}, 4};
  auto vg = predicate_value_and_grad(j, vec({1, 2, 1, 2}));
  EXPECT_DOUBLE_EQ(vg.value, 4.0);
  EXPECT_EQ(vg.grad.norm(), 0.0);
  vg = predicate_value_and_grad(j, vec({3, 0, 0, 4}));
  EXPECT_NEAR(vg.value, -1.0, 1e-15);
  EXPECT_NEAR(vg.grad[0], -0.6, 1e-15);
  EXPECT_NEAR(vg.grad[2], 0.6, 1e-15);
  EXPECT_NEAR(vg.grad[1], 0.8, 1e-15);
  EXPECT_NEAR(vg.grad[3], -0.8, 1e-15);
}

TEST(Predicate, AffineHeading) {
  auto psi = body("G[0,1] aff(0,0,1;50)");
  auto vg = predicate_value_and_grad(psi.literals[0].predicate, vec({0, 0, 45}));
  EXPECT_DOUBLE_EQ(vg.value, 5.0);
  EXPECT_EQ(vg.grad[2], -1.0);
  EXPECT_EQ(vg.grad[0], 0.0);
}

TEST(Predicate, BandIsOneDimensionalBall) {
  BandPredicate b{2, 45, 5};
  EXPECT_DOUBLE_EQ(predicate_value(b, vec({0, 0, 45})), 5.0);
  EXPECT_DOUBLE_EQ(predicate_value(b, vec({0, 0, 48})), 2.0);
  EXPECT_DOUBLE_EQ(predicate_value(b, vec({0, 0, 41})), 1.0);
  EXPECT_EQ(predicate_value_and_grad(b, vec({0, 0, 48})).grad[2], -1.0);
  EXPECT_EQ(predicate_value_and_grad(b, vec({0, 0, 41})).grad[2], 1.0);
  EXPECT_EQ(predicate_value_and_grad(b, vec({0, 0, 45})).grad.norm(), 0.0);
}

TEST(Smooth, SymmetricLeaves) {
  // Two leaves at the same value c: c - ln 2, gradient the average.
  auto psi = body("G[0,1] aff(1,0;5) and aff(0,1;5)");
  Vector x = vec({2, 2});
  auto vg = smooth_value_and_grad(psi, x);
  EXPECT_NEAR(vg.value, 3.0 - std::log(2.0), 1e-15);
  EXPECT_NEAR(vg.grad[0], -0.5, 1e-15);
  EXPECT_NEAR(vg.grad[1], -0.5, 1e-15);
}

TEST(Smooth, SeparatedLeaves) {
  auto psi = body("G[0,1] aff(1;0) and aff(1;10)");
  double v = smooth_robustness(psi, vec({0}));
  double expect = -std::log1p(std::exp(-10.0));
  EXPECT_NEAR(v, expect, 1e-18);
  EXPECT_NEAR(v, -4.5398899e-5, 1e-12);
}

TEST(Smooth, SingleLeafIsExact) {
  auto psi = body("G[0,1] ball(0,1;20,30;10)");
  Vector x = vec({23, 34});
  auto vg = smooth_value_and_grad(psi, x, {0.3});
  auto pv = predicate_value_and_grad(psi.literals[0].predicate, x);
  EXPECT_EQ(vg.value, pv.value);
  EXPECT_EQ((vg.grad - pv.grad).norm(), 0.0);
}

TEST(Smooth, NoOverflowForLargeValues) {
  auto psi = body("G[0,1] aff(1;-1000) and aff(1;-1001)");
  double v = smooth_robustness(psi, vec({0}), {5.0});
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -1001 - std::log1p(std::exp(-5.0)) / 5.0, 1e-9);
}

TEST(Exact, MinOfLeaves) {
  auto psi = body("G[0,1] aff(1;3) and aff(1;-1)");
  EXPECT_EQ(exact_robustness(psi, vec({0})), -1.0);
  auto one = body("G[0,1] ball(0;1;2)");
  EXPECT_EQ(exact_robustness(one, vec({0.5})), 1.5);
}

TEST(Exact, RandomSevenLeafConjunctions) {
  oracle::Generator gen(3);
  for (int trial = 0; trial < 500; ++trial) {
    Conjunction psi;
    for (int i = 0; i < 7; ++i) psi.literals.push_back({gen.predicate(5, 10.0), false});
    Vector x = gen.vector(5, -15, 15);
    EXPECT_NEAR(exact_robustness(psi, x), oracle::exact(psi, x), 1e-12);
  }
}

TEST(Property, NegationFlipsSign) {
  oracle::Generator gen(5);
  for (int trial = 0; trial < 500; ++trial) {
    Literal lit{gen.predicate(4, 10.0), false};
    Literal neg{lit.predicate, true};
    Vector x = gen.vector(4, -15, 15);
    EXPECT_EQ(literal_value(neg, x), -literal_value(lit, x));
  }
}

TEST(Property, UnderApproximationBound) {
  oracle::Generator gen(17);
  for (int trial = 0; trial < 2000; ++trial) {
    auto psi = gen.conjunction(6, 8, 10.0);
    Vector x = gen.vector(6, -15, 15);
    double eta = gen.uniform(0.2, 5.0);
    double s = smooth_robustness(psi, x, {eta});
    double e = exact_robustness(psi, x);
    double m = static_cast<double>(psi.size());
    EXPECT_LE(s, e);
    EXPECT_LE(e, s + std::log(m) / eta);
  }
}

TEST(Property, SmoothMatchesLongDoubleOracle) {
  oracle::Generator gen(19);
  for (int trial = 0; trial < 1000; ++trial) {
    auto psi = gen.conjunction(6, 8, 10.0);
    Vector x = gen.vector(6, -15, 15);
    EXPECT_NEAR(smooth_robustness(psi, x), oracle::smooth(psi, x, 1.0), 1e-11);
  }
}

TEST(Property, GradientsMatchFiniteDifferences) {
  oracle::Generator gen(23);
  int checked = 0;
  while (checked < 1000) {
    auto psi = gen.conjunction(6, 6, 10.0);
    Vector x = gen.vector(6, -15, 15);
    if (kink_distance(psi, x) < 1e-3) continue;
    double eta = gen.uniform(0.5, 2.0);
    Vector g = smooth_value_and_grad(psi, x, {eta}).grad;
    Vector fd = oracle::fd_gradient(
        [&](const Vector& z) { return oracle::smooth(psi, z, eta); }, x);
    ASSERT_GT(fd.norm(), 0.0);
    EXPECT_LT((g - fd).norm() / fd.norm(), 1e-5) << to_string(psi);
    ++checked;
  }
}

TEST(Property, PredicateGradientsMatchFiniteDifferences) {
  oracle::Generator gen(29);
  int checked = 0;
  while (checked < 1000) {
    auto p = gen.predicate(5, 10.0);
    Vector x = gen.vector(5, -15, 15);
    Conjunction one;
    one.literals.push_back({p, false});
    if (kink_distance(one, x) < 1e-3) continue;
    Vector g = predicate_value_and_grad(p, x).grad;
    Vector fd = oracle::fd_gradient([&](const Vector& z) { return oracle::leaf(p, z); }, x);
    EXPECT_LT((g - fd).norm() / fd.norm(), 1e-5);
    ++checked;
  }
}

TEST(Property, SoftminWeightsFormDistribution) {
  oracle::Generator gen(31);
  for (int trial = 0; trial < 500; ++trial) {
    auto psi = gen.conjunction(5, 8, 10.0);
    Vector x = gen.vector(5, -15, 15);
    auto w = softmin_weights(psi, x, {gen.uniform(0.2, 5.0)});
    ASSERT_EQ(w.size(), psi.size());
    for (double v : w) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  }
}
