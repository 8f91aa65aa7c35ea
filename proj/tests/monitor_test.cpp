#include <gtest/gtest.h>

#include "etstl/error.hpp"
#include "etstl/monitor.hpp"
#include "oracles.hpp"

using namespace etstl;

namespace {

struct Signal {
  std::vector<double> times;
  Matrix states;
  SignalView view() const { return {times, states}; }
};

// x(t) = t on one coordinate, sampled at dt.
Signal ramp(double t_end, double dt) {
  Signal s;
  long n = static_cast<long>(t_end / dt + 0.5) + 1;
  s.states.resize(1, n);
  for (long k = 0; k < n; ++k) {
    s.times.push_back(k * dt);
    s.states(0, k) = k * dt;
  }
  return s;
}

Signal piecewise_linear(oracle::Generator& gen, int dim, double t_end, double dt) {
  int knots = gen.integer(2, 6);
  std::vector<double> kt(knots);
  std::vector<Vector> kv(knots);
  for (int i = 0; i < knots; ++i) {
    kt[i] = t_end * i / (knots - 1);
    kv[i] = gen.vector(dim, -10, 10);
  }
  Signal s;
  long n = static_cast<long>(t_end / dt + 0.5) + 1;
  s.states.resize(dim, n);
  for (long k = 0; k < n; ++k) {
    double t = k * dt;
    s.times.push_back(t);
    int seg = std::min(knots - 2, static_cast<int>(t / (t_end / (knots - 1))));
    double a = (t - kt[seg]) / (kt[seg + 1] - kt[seg]);
    s.states.col(k) = (1 - a) * kv[seg] + a * kv[seg + 1];
  }
  return s;
}

}  // namespace

TEST(Monitor, ConstantSignal) {
  auto psi = std::get<AtomSequence>(parse_formula("G[0,10] aff(1;2)")).atoms[0];
  Signal s;
  s.states = Matrix::Zero(1, 21);
  for (int k = 0; k <= 20; ++k) s.times.push_back(k * 0.5);
  EXPECT_EQ(monitor_robustness(psi, s.view(), 0.0), 2.0);
}

TEST(Monitor, RampEventually) {
  // h(x(t)) = t - 5 on samples t = 0..10: the best sample is t = 10.
  auto phi = std::get<AtomSequence>(parse_formula("F[0,10] aff(-1;-5)")).atoms[0];
  Signal s = ramp(10, 1);
  EXPECT_EQ(monitor_robustness(phi, s.view(), 0.0), 5.0);
  auto g = phi;
  g.op = TemporalOp::Always;
  EXPECT_EQ(monitor_robustness(g, s.view(), 0.0), -5.0);
}

TEST(Monitor, WindowIsClosed) {
  Signal s = ramp(10, 1);
  auto phi = std::get<AtomSequence>(parse_formula("F[2,4] aff(-1;0)")).atoms[0];
  EXPECT_EQ(monitor_robustness(phi, s.view(), 0.0), 4.0);
  EXPECT_EQ(monitor_robustness(phi, s.view(), 3.0), 7.0);
  phi.op = TemporalOp::Always;
  EXPECT_EQ(monitor_robustness(phi, s.view(), 0.0), 2.0);
}

TEST(Monitor, OffGridEndpointsUseEnclosedSamples) {
  Signal s = ramp(10, 1);
  auto phi = std::get<AtomSequence>(parse_formula("G[2.5,6.5] aff(-1;0)")).atoms[0];
  EXPECT_EQ(monitor_robustness(phi, s.view(), 0.0), 3.0);
}

TEST(Monitor, UncoveredWindowThrows) {
  Signal s = ramp(10, 1);
  auto phi = std::get<AtomSequence>(parse_formula("F[5,12] aff(1;0)")).atoms[0];
  EXPECT_THROW(monitor_robustness(phi, s.view(), 0.0), WindowNotCovered);
  EXPECT_THROW(monitor_robustness(phi, s.view(), -6.0), WindowNotCovered);
  auto tight = std::get<AtomSequence>(parse_formula("F[2.2,2.8] aff(1;0)")).atoms[0];
  EXPECT_THROW(monitor_robustness(tight, s.view(), 0.0), WindowNotCovered);
}

TEST(Monitor, SequenceIsMinOfAtoms) {
  Signal s = ramp(10, 1);
  auto theta = parse_formula("F[0,4] aff(-1;-1) and F[5,10] aff(1;8)");
  // First atom: max(t - 1) over [0,4] = 3. Second: max(8 - t) over [5,10] = 3.
  EXPECT_EQ(monitor_robustness(theta, s.view(), 0.0), 3.0);
  auto theta2 = parse_formula("F[0,4] aff(-1;-1) and F[5,10] aff(1;6)");
  EXPECT_EQ(monitor_robustness(theta2, s.view(), 0.0), 1.0);
}

TEST(Monitor, ChainUsesCumulativeWindows) {
  Signal s = ramp(10, 1);
  // Windows [1,2] and [4,6]; the second atom peaks at t = 4.
  auto theta = parse_formula("F[1,2](aff(-1;0) and F[3,4] aff(1;10))");
  EXPECT_EQ(monitor_robustness(theta, s.view(), 0.0), 2.0);
}

TEST(Monitor, SmoothSemanticsUnderApproximates) {
  oracle::Generator gen(41);
  Signal s = piecewise_linear(gen, 3, 5, 0.1);
  auto theta = parse_formula("G[0,5] ball(0,1;0,0;20) and band(2;0;15)");
  MonitorOptions smooth;
  smooth.semantics = MonitorSemantics::Smooth;
  double e = monitor_robustness(theta, s.view(), 0.0);
  double v = monitor_robustness(theta, s.view(), 0.0, smooth);
  EXPECT_LE(v, e);
  EXPECT_LE(e, v + std::log(2.0));
}

TEST(Property, MatchesBruteForceOnRandomPairs) {
  oracle::Generator gen(43);
  for (int trial = 0; trial < 300; ++trial) {
    const int dim = gen.integer(1, 4);
    const double dt = gen.integer(0, 1) ? 0.1 : 0.25;
    Signal s = piecewise_linear(gen, dim, 10, dt);
    std::vector<TemporalFormula> atoms;
    double a1 = gen.integer(0, 8) * 0.5;
    double b1 = a1 + gen.integer(0, 4) * 0.5;
    double a2 = b1 + gen.integer(0, 4) * 0.5;
    double b2 = std::min(a2 + gen.integer(0, 4) * 0.5, 10.0);
    a2 = std::min(a2, b2);
    for (auto [lo, hi] : {std::pair{a1, b1}, std::pair{a2, b2}}) {
      TemporalFormula phi;
      phi.op = gen.integer(0, 1) ? TemporalOp::Always : TemporalOp::Eventually;
      phi.interval = {lo, hi};
      phi.body = gen.conjunction(dim, 3, 8.0);
      atoms.push_back(phi);
    }
    SequentialFormula theta = AtomSequence{atoms};
    double expect = std::min(
        oracle::monitor(atoms[0].body, atoms[0].op, atoms[0].interval, s.times, s.states, 0.0),
        oracle::monitor(atoms[1].body, atoms[1].op, atoms[1].interval, s.times, s.states, 0.0));
    EXPECT_EQ(monitor_robustness(theta, s.view(), 0.0), expect) << to_string(theta);
  }
}
