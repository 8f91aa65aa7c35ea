#pragma once

#include <vector>

#include "etstl/formula.hpp"

namespace etstl {

struct SmoothingConfig {
  double eta = 1.0;
};

struct ValueGrad {
  double value = 0.0;
  Vector grad;
};

/// h(x) and its gradient (state dimension, zero off the selector). At a
/// Ball/Join center the gradient is zero.
ValueGrad predicate_value_and_grad(const Predicate& p, const Vector& x);
double predicate_value(const Predicate& p, const Vector& x);

/// Literal value: h(x), or -h(x) when negated.
double literal_value(const Literal& lit, const Vector& x);

/// grad += weight * d(literal)/dx without allocating.
void add_literal_gradient(const Literal& lit, const Vector& x, double weight,
                          Vector& grad);

/// min over the conjunction's literal values.
double exact_robustness(const Conjunction& psi, const Vector& x);

/// -(1/eta) ln sum_i exp(-eta h_i), max-shifted. A single literal returns its
/// value exactly.
double smooth_robustness(const Conjunction& psi, const Vector& x,
                         const SmoothingConfig& cfg = {});

/// Same value; writes the gradient into `grad` (resized to x.size()).
double smooth_robustness(const Conjunction& psi, const Vector& x,
                         const SmoothingConfig& cfg, Vector& grad);

ValueGrad smooth_value_and_grad(const Conjunction& psi, const Vector& x,
                                const SmoothingConfig& cfg = {});

/// Softmin weights exp(-eta h_i) / sum_j exp(-eta h_j) for each literal.
std::vector<double> softmin_weights(const Conjunction& psi, const Vector& x,
                                    const SmoothingConfig& cfg = {});

}  // namespace etstl
