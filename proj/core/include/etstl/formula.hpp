#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace etstl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Predicates. Each yields a concave predicate function h; the predicate holds
// where h >= 0.

/// h(x) = radius - ||x[selector] - center||
struct BallPredicate {
  std::vector<int> selector;
  Vector center;
  double radius = 1.0;
};

/// h(x) = radius - ||x[first] - x[second]||
struct JoinPredicate {
  std::vector<int> first;
  std::vector<int> second;
  double radius = 1.0;
};

/// h(x) = offset - weights^T x. Missing trailing weights are zero.
struct AffinePredicate {
  Vector weights;
  double offset = 0.0;
};

/// |x[index] - center| < halfwidth as one leaf h(x) = halfwidth - |x[index] - center|
/// (a one-dimensional ball).
struct BandPredicate {
  int index = 0;
  double center = 0.0;
  double halfwidth = 1.0;
};

using Predicate =
    std::variant<BallPredicate, JoinPredicate, AffinePredicate, BandPredicate>;

struct Literal {
  Predicate predicate;
  bool negated = false;
};

/// Non-temporal formula: a flat, non-empty conjunction of (possibly negated)
/// predicates.
struct Conjunction {
  std::vector<Literal> literals;

  std::size_t size() const { return literals.size(); }
};

enum class TemporalOp { Always, Eventually };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
};

struct TemporalFormula {
  TemporalOp op = TemporalOp::Eventually;
  Interval interval;
  Conjunction body;
};

/// Conjunction of temporal atoms with b_k <= a_{k+1}.
struct AtomSequence {
  std::vector<TemporalFormula> atoms;
};

struct ChainStep {
  Conjunction body;
  Interval interval;
};

/// F[c1,d1](psi1 and F[c2,d2](psi2 and ... F[cK,dK] psiK)).
struct EventuallyChain {
  std::vector<ChainStep> steps;
};

using SequentialFormula = std::variant<AtomSequence, EventuallyChain>;

/// One atomic temporal task produced by flattening a sequential formula.
struct AtomicTask {
  Conjunction psi;
  TemporalOp op = TemporalOp::Eventually;
  /// Window in global time: [a_i, b_i] (cumulative sums for chains).
  Interval window;
  /// Window the sequencer schedules against: [a_i, b_i] for atom
  /// sequences, the step's own [c_i, d_i] for chains.
  Interval schedule;
  /// 1 for atom sequences (windows are absolute), 0 for chains.
  bool absolute_time = true;

  bool always() const { return op == TemporalOp::Always; }
};

struct ParseOptions {
  /// Permit `not` in front of Ball/Join/Band predicates (breaks concavity).
  bool allow_nonconcave = false;
};

SequentialFormula parse_formula(std::string_view text,
                                const ParseOptions& options = {});

/// Flattens a sequential formula into its atomic tasks.
std::vector<AtomicTask> normalize_sequential(const SequentialFormula& theta);

/// Latest window end over all atoms, in global time.
double formula_horizon(const SequentialFormula& theta);

/// Smallest state dimension the formula can be evaluated on.
std::size_t required_dimension(const Conjunction& psi);
std::size_t required_dimension(const SequentialFormula& theta);

/// Throws FormulaError if any index is outside [0, dim).
void check_dimension(const SequentialFormula& theta, std::size_t dim);
void check_dimension(const Conjunction& psi, std::size_t dim);

/// True when every negated literal is affine.
bool is_concave(const Conjunction& psi);

/// Sufficient (not necessary) boundedness check: at least one Ball, Join or
/// Band literal that is not negated.
bool is_well_posed(const Conjunction& psi);

std::string to_string(const Conjunction& psi);
std::string to_string(const SequentialFormula& theta);

}  // namespace etstl
