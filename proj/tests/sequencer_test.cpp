#include <gtest/gtest.h>

#include <cmath>

#include "etstl/episode.hpp"
#include "etstl/error.hpp"
#include "etstl/sequencer.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace etstl;

namespace {

SequencerConfig single_integrator_config(int dim) {
  SequencerConfig cfg;
  cfg.actuation = single_integrator(dim).actuation;
  return cfg;
}

Vector point(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST(Sequencer, InitOnTeamTask) {
  SequencerConfig cfg;
  cfg.actuation = omni_team_plant().actuation;
  SynthesisConfig first;
  first.rho_max = 1.8;
  first.r = 0.5;
  cfg.synthesis = {first};
  Sequencer seq(parse_formula(testdata::kTeamFormula), cfg);
  Vector x0(9);
  x0 << 27, 37, 0, 44, 68, 0, 55, 37, 0;
  const auto& z = seq.init(x0);
  EXPECT_EQ(z.q, 1);
  EXPECT_EQ(z.delta, 0.0);
  EXPECT_EQ(z.funnel.rho_max, 1.8);
  EXPECT_EQ(z.funnel.r, 0.5);
  EXPECT_EQ(z.funnel.t_star, 50.0);
  EXPECT_TRUE(z.absolute_time);
  EXPECT_EQ(seq.task_count(), 2);
}

TEST(Sequencer, InfeasibleImmediateTask) {
  Sequencer seq(parse_formula("G[0,5] ball(0,1;10,10;1)"), single_integrator_config(2));
  EXPECT_THROW(seq.init(point(0, 0)), InfeasibleSynthesis);
}

TEST(Sequencer, ChainTasksUseCumulativeWindows) {
  Sequencer seq(parse_formula("F[1,2](ball(0,1;0,0;5) and F[3,4] ball(0,1;5,5;5))"),
                single_integrator_config(2));
  ASSERT_EQ(seq.tasks().size(), 2u);
  EXPECT_EQ(seq.tasks()[1].window.lo, 4.0);
  EXPECT_EQ(seq.tasks()[1].window.hi, 6.0);
  seq.init(point(-3, 0));
  EXPECT_FALSE(seq.state().absolute_time);
  EXPECT_EQ(seq.state().funnel.t_star, 2.0);
}

TEST(Sequencer, AlwaysTaskJumpsAtDeadline) {
  Sequencer seq(parse_formula("G[0,0.5] ball(0,1;0,0;5) and F[1,3] ball(0,1;3,0;5)"),
                single_integrator_config(2));
  Vector x = point(1, 0);
  seq.init(x);
  for (int k = 0; k <= 49; ++k) {
    seq.flow_to(k * 0.01);
    EXPECT_FALSE(seq.jump_if_due(x).has_value()) << k;
  }
  seq.flow_to(0.5);
  auto jump = seq.jump_if_due(x);
  ASSERT_TRUE(jump.has_value());
  EXPECT_EQ(jump->from_mode, 1);
  EXPECT_DOUBLE_EQ(jump->time, 0.5);
  EXPECT_EQ(seq.state().q, 2);
  EXPECT_DOUBLE_EQ(seq.state().delta, 0.5);
  // Second window [1,3] in global time is [0.5, 2.5] on the new local clock.
  auto w = local_window(seq.active_task(), seq.state().delta);
  EXPECT_DOUBLE_EQ(w.lo, 0.5);
  EXPECT_DOUBLE_EQ(w.hi, 2.5);
}

TEST(Sequencer, EventuallyTaskNeedsWindowAndRobustness) {
  Sequencer seq(parse_formula("F[1,3] ball(0,1;0,0;4)"), single_integrator_config(2));
  seq.init(point(10, 0));
  Vector inside = point(0.5, 0);
  seq.flow_to(0.5);
  EXPECT_FALSE(seq.jump_if_due(inside).has_value());  // before the window opens
  seq.flow_to(1.5);
  EXPECT_FALSE(seq.jump_if_due(point(3.5, 0)).has_value());  // rho = 0.5 < r
  auto jump = seq.jump_if_due(inside);
  ASSERT_TRUE(jump.has_value());
  EXPECT_GT(jump->rho, seq.funnels()[0].r);
  EXPECT_TRUE(seq.finished());
  EXPECT_EQ(seq.state().q, 2);
  EXPECT_FALSE(seq.jump_if_due(inside).has_value());
}

TEST(Sequencer, DeadlineMissIsTaskFailure) {
  Sequencer seq(parse_formula("F[1,3] ball(0,1;0,0;4)"), single_integrator_config(2));
  seq.init(point(10, 0));
  seq.flow_to(3.0);
  EXPECT_FALSE(seq.jump_if_due(point(10, 0)).has_value());
  seq.flow_to(3.01);
  EXPECT_THROW(seq.jump_if_due(point(10, 0)), TaskFailure);
}

TEST(Sequencer, TerminalModeKeepsLastLaw) {
  Sequencer seq(parse_formula("F[0,2] ball(0,1;0,0;4)"), single_integrator_config(2));
  seq.init(point(5, 0));
  Vector x = point(2, 0);
  seq.flow_to(1.0);
  Vector before = seq.active_control(x);
  ASSERT_TRUE(seq.jump_if_due(x).has_value());
  ASSERT_TRUE(seq.finished());
  EXPECT_EQ(&seq.active_task(), &seq.tasks().back());
  EXPECT_EQ((seq.active_control(x) - before).norm(), 0.0);
  seq.flow_to(1.5);
  EXPECT_DOUBLE_EQ(seq.state().funnel_time, 1.5);
}

TEST(Property, RandomSequencedInstances) {
  oracle::Generator gen(91);
  int runs = 0;
  for (int trial = 0; trial < 12; ++trial) {
    auto inst = testdata::random_sequence(gen, trial % 2 == 0);
    auto res = run_episode(inst.config);
    ASSERT_EQ(res.metrics.status, RunStatus::Satisfied)
        << to_string(inst.config.formula) << ": " << res.metrics.failure;
    auto check = testdata::check_sequencing(res, inst.config.formula);
    EXPECT_TRUE(check.ok) << to_string(inst.config.formula) << ": " << check.detail;
    ++runs;
  }
  EXPECT_EQ(runs, 12);
}
