#include <gtest/gtest.h>

#include "etstl/error.hpp"
#include "etstl/formula.hpp"
#include "oracles.hpp"

using namespace etstl;

namespace {

const char* kTheta =
    "F[0,50] ball(0,1;20,30;10) and ball(3,4;40,60;10) and ball(6,7;60,30;10) and "
    "join(0,1;6,7;30) and band(2;45;5) and band(5;45;5) and band(8;45;5) and "
    "F[50,100] ball(0,1;90,90;10) and join(0,1;3,4;10) and join(3,4;6,7;10) and "
    "band(2;45;5) and band(5;45;5) and band(8;45;5)";

std::size_t parse_error_position(const std::string& text) {
  try {
    parse_formula(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  ADD_FAILURE() << "no ParseError for: " << text;
  return std::string::npos;
}

}  // namespace

TEST(Parse, SingleAlwaysAffine) {
  auto theta = parse_formula("G[0,5] aff(1,0;3)");
  const auto& seq = std::get<AtomSequence>(theta);
  ASSERT_EQ(seq.atoms.size(), 1u);
  EXPECT_EQ(seq.atoms[0].op, TemporalOp::Always);
  EXPECT_EQ(seq.atoms[0].interval.lo, 0.0);
  EXPECT_EQ(seq.atoms[0].interval.hi, 5.0);
  ASSERT_EQ(seq.atoms[0].body.size(), 1u);
  const auto& a = std::get<AffinePredicate>(seq.atoms[0].body.literals[0].predicate);
  EXPECT_EQ(a.offset, 3.0);
  Vector x(2);
  x << 1.0, 7.0;
  EXPECT_DOUBLE_EQ(predicate_value(a, x), 2.0);
}

TEST(Parse, TwoRobotTeamTask) {
  auto theta = parse_formula(kTheta);
  const auto& seq = std::get<AtomSequence>(theta);
  ASSERT_EQ(seq.atoms.size(), 2u);
  EXPECT_EQ(seq.atoms[0].body.size(), 7u);
  EXPECT_EQ(seq.atoms[1].body.size(), 6u);
  EXPECT_EQ(seq.atoms[0].interval.hi, 50.0);
  EXPECT_EQ(seq.atoms[1].interval.lo, 50.0);
  EXPECT_EQ(required_dimension(theta), 9u);
  EXPECT_DOUBLE_EQ(formula_horizon(theta), 100.0);
}

TEST(Parse, WhitespaceInsensitive) {
  auto a = parse_formula("F[0,5]ball(0,1;2,3;4)and band(2;1;0.5)");
  auto b = parse_formula("  F [ 0 , 5 ]  ball( 0 , 1 ; 2 , 3 ; 4 )\n and\tband(2; 1; 0.5) ");
  EXPECT_EQ(to_string(a), to_string(b));
}

TEST(Parse, ReversedIntervalRejected) {
  EXPECT_THROW(parse_formula("G[5,2] aff(1;0)"), FormulaError);
  EXPECT_THROW(parse_formula("G[5,2] p"), Error);
}

TEST(Parse, AtomOrderingEnforced) {
  EXPECT_NO_THROW(parse_formula("F[0,5] band(0;0;1) and G[5,9] band(0;0;1)"));
  EXPECT_THROW(parse_formula("F[0,6] band(0;0;1) and G[5,9] band(0;0;1)"), FormulaError);
}

TEST(Parse, NegationOnlyOnAffine) {
  EXPECT_NO_THROW(parse_formula("G[0,1] ball(0;0;1) and not aff(1;2)"));
  EXPECT_THROW(parse_formula("G[0,1] not ball(0;0;1)"), FormulaError);
  ParseOptions opts;
  opts.allow_nonconcave = true;
  auto theta = parse_formula("G[0,1] not ball(0;0;1)", opts);
  EXPECT_FALSE(is_concave(std::get<AtomSequence>(theta).atoms[0].body));
}

TEST(Parse, NonPositiveRadiusRejected) {
  EXPECT_THROW(parse_formula("G[0,1] ball(0;0;0)"), Error);
  EXPECT_THROW(parse_formula("G[0,1] join(0;1;-1)"), Error);
  EXPECT_THROW(parse_formula("G[0,1] band(0;0;0)"), Error);
}

TEST(Parse, SelectorShapeChecked) {
  EXPECT_THROW(parse_formula("G[0,1] ball(0,1;0;1)"), Error);
  EXPECT_THROW(parse_formula("G[0,1] join(0,1;2;1)"), Error);
}

TEST(Parse, ErrorsCarryPositions) {
  EXPECT_EQ(parse_error_position("F[0,5] ball(0;1;2) and"), 19u);
  EXPECT_EQ(parse_error_position("F[0,5] bal(0;1;2)"), 7u);
  EXPECT_EQ(parse_error_position("F[0,5 ball(0;1;2)"), 6u);
  try {
    parse_formula("F[0,5] ball(0;1;2) and");
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 19"), std::string::npos) << e.what();
  }
}

TEST(Parse, EmptyTextRejected) {
  EXPECT_THROW(parse_formula(""), Error);
  EXPECT_THROW(parse_formula("   "), Error);
}

TEST(Parse, BareConjunctionRejected) {
  EXPECT_THROW(parse_formula("ball(0;1;2)"), Error);
}

TEST(Parse, ParenthesesGroupBodies) {
  auto a = parse_formula("G[0,1] (ball(0;0;1) and (band(1;0;1))) and F[1,2] aff(1;1)");
  const auto& seq = std::get<AtomSequence>(a);
  ASSERT_EQ(seq.atoms.size(), 2u);
  EXPECT_EQ(seq.atoms[0].body.size(), 2u);
}

TEST(Parse, ChainDetected) {
  auto theta = parse_formula("F[1,2](ball(0;0;1) and F[3,4] ball(0;5;1))");
  const auto& chain = std::get<EventuallyChain>(theta);
  ASSERT_EQ(chain.steps.size(), 2u);
  EXPECT_EQ(chain.steps[1].interval.lo, 3.0);
}

TEST(Parse, RoundTrip) {
  oracle::Generator gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    double t = 0;
    int atoms = gen.integer(1, 3);
    for (int i = 0; i < atoms; ++i) {
      double lo = t + gen.integer(0, 3);
      double hi = lo + gen.integer(0, 4);
      t = hi;
      if (i > 0) text += " and ";
      text += (gen.integer(0, 1) ? "G[" : "F[") + std::to_string(lo) + "," + std::to_string(hi) +
              "] " + to_string(gen.conjunction(6, 4, 10.0));
    }
    auto once = parse_formula(text);
    auto twice = parse_formula(to_string(once));
    EXPECT_EQ(to_string(once), to_string(twice)) << text;
  }
}

TEST(Normalize, AtomSequencePassthrough) {
  auto tasks = normalize_sequential(parse_formula("G[1,2] aff(1;0) and F[3,7] aff(1;0)"));
  ASSERT_EQ(tasks.size(), 2u);
  EXPECT_TRUE(tasks[0].always());
  EXPECT_FALSE(tasks[1].always());
  for (const auto& t : tasks) {
    EXPECT_TRUE(t.absolute_time);
    EXPECT_EQ(t.window.lo, t.schedule.lo);
    EXPECT_EQ(t.window.hi, t.schedule.hi);
  }
  EXPECT_EQ(tasks[1].window.lo, 3.0);
  EXPECT_EQ(tasks[1].window.hi, 7.0);
}

TEST(Normalize, ChainCumulativeWindows) {
  auto tasks = normalize_sequential(parse_formula("F[1,2](band(0;0;1) and F[3,4] band(0;2;1))"));
  ASSERT_EQ(tasks.size(), 2u);
  EXPECT_EQ(tasks[0].window.lo, 1.0);
  EXPECT_EQ(tasks[0].window.hi, 2.0);
  EXPECT_EQ(tasks[1].window.lo, 4.0);
  EXPECT_EQ(tasks[1].window.hi, 6.0);
  EXPECT_FALSE(tasks[1].absolute_time);
  EXPECT_EQ(tasks[1].schedule.lo, 3.0);
  EXPECT_EQ(tasks[1].schedule.hi, 4.0);
}

TEST(Normalize, SingleStepChain) {
  auto tasks = normalize_sequential(parse_formula("F[2,5] band(0;0;1)"));
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_FALSE(tasks[0].always());
  EXPECT_EQ(tasks[0].window.lo, 2.0);
  EXPECT_EQ(tasks[0].window.hi, 5.0);
}

TEST(Normalize, RandomChainsMatchCumulativeSums) {
  oracle::Generator gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    int k = gen.integer(2, 5);
    std::vector<Interval> steps;
    for (int i = 0; i < k; ++i) {
      double c = gen.integer(0, 10) * 0.25;
      steps.push_back({c, c + gen.integer(0, 10) * 0.5});
    }
    std::string text;
    for (int i = 0; i < k; ++i) {
      text += "F[" + std::to_string(steps[i].lo) + "," + std::to_string(steps[i].hi) + "]";
      text += i + 1 < k ? "(band(0;0;1) and " : " band(0;0;1)";
    }
    text += std::string(k - 1, ')');
    auto tasks = normalize_sequential(parse_formula(text));
    auto expect = oracle::cumulative_windows(steps);
    ASSERT_EQ(tasks.size(), expect.size()) << text;
    for (int i = 0; i < k; ++i) {
      EXPECT_DOUBLE_EQ(tasks[i].window.lo, expect[i].lo) << text;
      EXPECT_DOUBLE_EQ(tasks[i].window.hi, expect[i].hi) << text;
    }
  }
}

TEST(Structure, DimensionChecks) {
  auto theta = parse_formula("G[0,1] ball(0,4;1,1;1)");
  EXPECT_EQ(required_dimension(theta), 5u);
  EXPECT_NO_THROW(check_dimension(theta, 5));
  EXPECT_THROW(check_dimension(theta, 4), FormulaError);
}

TEST(Structure, WellPosedness) {
  auto body = [](const char* text) {
    return std::get<AtomSequence>(parse_formula(text)).atoms[0].body;
  };
  EXPECT_TRUE(is_well_posed(body("G[0,1] ball(0;0;1)")));
  EXPECT_TRUE(is_well_posed(body("G[0,1] aff(1;0) and band(0;0;1)")));
  EXPECT_FALSE(is_well_posed(body("G[0,1] aff(1;0) and not aff(0,1;2)")));
}
