#pragma once

#include <optional>

#include "etstl/formula.hpp"
#include "etstl/robustness.hpp"

namespace etstl {

/// gamma(t) = (gamma0 - gamma_inf) exp(-l t) + gamma_inf
struct PerformanceFunction {
  double gamma0 = 1.0;
  double gamma_inf = 1.0;
  double l = 0.0;

  double operator()(double t) const;
  double derivative(double t) const;
};

double gamma_at(const PerformanceFunction& pf, double t);

/// Funnel around one atomic task. Times are local to the task's start.
struct FunnelParams {
  double t_star = 0.0;
  double r = 0.0;
  double rho_max = 0.0;
  PerformanceFunction perf;

  double lower(double t) const { return rho_max - perf(t); }
  /// Distance of rho to the nearer funnel edge; positive inside.
  double margin(double rho, double t) const;
};

/// S(xi) = ln((xi + 1) / (M - xi)) on (-1, M). Throws FunnelViolation
/// outside the domain.
double transform(double xi, double M = 0.0);
/// dS/dxi
double transform_derivative(double xi, double M = 0.0);

struct TransformedError {
  double e = 0.0;    // rho - rho_max
  double xi = 0.0;   // e / gamma(t)
  double eps = 0.0;  // S(xi)
};

TransformedError transformed_error(double rho, const FunnelParams& fp, double t);
TransformedError transformed_error(const Conjunction& psi, const FunnelParams& fp,
                                   const Vector& x, double t,
                                   const SmoothingConfig& smoothing = {});

struct SynthesisConfig {
  std::optional<double> chi;
  /// chi = chi_fraction * (rho_opt - max(0, rho0)) when chi is unset.
  double chi_fraction = 0.05;
  double r_fraction = 0.25;
  /// gamma0 = (rho_max - rho0) + gamma0_margin * rho_max when t_star > 0.
  double gamma0_margin = 0.5;
  /// When set (> 1), gamma0 = gamma0_scale * (rho_max - rho0) instead, which
  /// starts the task at xi = -1 / gamma0_scale.
  std::optional<double> gamma0_scale;
  /// gamma_inf = gamma_inf_fraction * (rho_max - r) when l must decay to meet
  /// r at t_star (the upper end of its interval would need l = infinity).
  double gamma_inf_fraction = 0.5;

  std::optional<double> t_star;
  std::optional<double> rho_max;
  std::optional<double> r;
  std::optional<double> gamma0;
  std::optional<double> gamma_inf;
  std::optional<double> l;
};

/// Inputs to parameter selection. `window` is in the funnel's local time.
struct SynthesisProblem {
  TemporalOp op = TemporalOp::Eventually;
  Interval window;
  double rho0 = 0.0;
  double rho_opt = 0.0;
};

FunnelParams synthesize_funnel(const SynthesisProblem& problem,
                               const SynthesisConfig& cfg = {});

/// Computes rho0 and rho_opt for the task, then selects parameters. The local
/// window is the task's schedule shifted back by `elapsed` when the task
/// uses absolute time.
FunnelParams synthesize_funnel(const AtomicTask& task, const Vector& x0,
                               const SynthesisConfig& cfg = {},
                               const SmoothingConfig& smoothing = {},
                               double elapsed = 0.0);

/// Re-checks every membership condition on chosen parameters. Throws
/// InfeasibleSynthesis naming the first condition that fails.
void validate_funnel(const FunnelParams& fp, const SynthesisProblem& problem,
                     double chi);

/// The l that makes gamma(t_star) = rho_max - r.
double decay_rate_for(double gamma0, double gamma_inf, double rho_max, double r,
                      double t_star);

}  // namespace etstl
