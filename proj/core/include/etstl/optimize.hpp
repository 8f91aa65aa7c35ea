#pragma once

#include <optional>

#include "etstl/formula.hpp"
#include "etstl/robustness.hpp"

namespace etstl {

struct OptimizerConfig {
  double tolerance = 1e-8;
  long max_iterations = 100000;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  /// Ascent is declared unbounded once ||x - x_init|| exceeds this.
  double escape_radius = 1e8;
};

struct OptimizationResult {
  Vector x_star;
  double rho_opt = 0.0;
  long iterations = 0;
  /// Norm of the smallest ascent subgradient found at x_star (the plain
  /// gradient norm away from norm kinks).
  double grad_norm = 0.0;
};

/// Mean of Ball and Band centers per coordinate, zero elsewhere.
Vector default_start(const Conjunction& psi, std::size_t dim);

/// Maximizes the smoothed robustness. The objective is concave but not
/// differentiable where a Ball/Join norm vanishes, so plain Armijo ascent is
/// combined with an active set of such kinks: iterates are snapped onto the
/// kink manifold, ascent continues in its null space, and a kink is released
/// when its least-squares multiplier exceeds the leaf's softmin weight.
OptimizationResult optimize_robustness(const Conjunction& psi,
                                       const SmoothingConfig& smoothing = {},
                                       const std::optional<Vector>& x_init = std::nullopt,
                                       const OptimizerConfig& cfg = {});

}  // namespace etstl
