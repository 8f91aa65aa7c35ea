#include "etstl/funnel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etstl/error.hpp"
#include "etstl/optimize.hpp"

namespace etstl {

double PerformanceFunction::operator()(double t) const {
  return (gamma0 - gamma_inf) * std::exp(-l * t) + gamma_inf;
}

double PerformanceFunction::derivative(double t) const {
  return -l * (gamma0 - gamma_inf) * std::exp(-l * t);
}

double gamma_at(const PerformanceFunction& pf, double t) { return pf(t); }

double FunnelParams::margin(double rho, double t) const {
  return std::min(rho - lower(t), rho_max - rho);
}

double transform(double xi, double M) {
  if (!(xi > -1.0 && xi < M)) {
    std::ostringstream os;
    os << "normalized error " << xi << " left (-1, " << M << ")";
    throw FunnelViolation(os.str(), xi, 0.0);
  }
  return std::log1p(xi) - std::log(M - xi);
}

double transform_derivative(double xi, double M) {
  return 1.0 / (1.0 + xi) + 1.0 / (M - xi);
}

TransformedError transformed_error(double rho, const FunnelParams& fp, double t) {
  TransformedError out;
  out.e = rho - fp.rho_max;
  out.xi = out.e / fp.perf(t);
  if (!(out.xi > -1.0 && out.xi < 0.0)) {
    std::ostringstream os;
    os << "funnel violated at t=" << t << ": rho=" << rho << ", xi=" << out.xi;
    throw FunnelViolation(os.str(), out.xi, t);
  }
  out.eps = std::log1p(out.xi) - std::log(-out.xi);
  return out;
}

TransformedError transformed_error(const Conjunction& psi, const FunnelParams& fp,
                                   const Vector& x, double t,
                                   const SmoothingConfig& smoothing) {
  return transformed_error(smooth_robustness(psi, x, smoothing), fp, t);
}

double decay_rate_for(double gamma0, double gamma_inf, double rho_max, double r,
                      double t_star) {
  return std::log((r + gamma_inf - rho_max) / -(gamma0 - gamma_inf)) / -t_star;
}

namespace {

[[noreturn]] void infeasible(const std::string& what) {
  throw InfeasibleSynthesis("funnel synthesis infeasible: " + what);
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

void validate_funnel(const FunnelParams& fp, const SynthesisProblem& p, double chi) {
  const double a = p.window.lo;
  const double b = p.window.hi;
  const double floor0 = std::max(0.0, p.rho0);

  if (!(p.rho_opt > 0.0)) infeasible("rho_opt = " + fmt_num(p.rho_opt) + " is not positive");
  if (p.op == TemporalOp::Always) {
    if (a < 0.0) infeasible("always-window start " + fmt_num(a) + " has already passed");
    if (!close(fp.t_star, a)) infeasible("t_star must equal the window start for G");
  } else {
    if (b < 0.0) infeasible("eventually-window end " + fmt_num(b) + " has already passed");
    if (fp.t_star < std::max(0.0, a) || fp.t_star > b) {
      infeasible("t_star " + fmt_num(fp.t_star) + " outside [" +
                 fmt_num(std::max(0.0, a)) + ", " + fmt_num(b) + "]");
    }
  }
  if (!(chi > 0.0) || !(chi < p.rho_opt - floor0)) {
    infeasible("chi " + fmt_num(chi) + " must lie in (0, " + fmt_num(p.rho_opt - floor0) + ")");
  }
  if (!(fp.rho_max > floor0) || fp.rho_max > p.rho_opt - chi + 1e-12) {
    infeasible("rho_max " + fmt_num(fp.rho_max) + " outside (" + fmt_num(floor0) + ", " +
               fmt_num(p.rho_opt - chi) + "]");
  }
  if (!(fp.r > 0.0 && fp.r < fp.rho_max)) {
    infeasible("r " + fmt_num(fp.r) + " outside (0, rho_max)");
  }
  const auto& pf = fp.perf;
  if (!(pf.gamma0 > fp.rho_max - p.rho0)) {
    infeasible("gamma0 " + fmt_num(pf.gamma0) + " must exceed rho_max - rho0 = " +
               fmt_num(fp.rho_max - p.rho0));
  }
  if (fp.t_star == 0.0 && pf.gamma0 > fp.rho_max - fp.r) {
    infeasible("with t_star = 0, gamma0 must not exceed rho_max - r");
  }
  if (!(pf.gamma_inf > 0.0) || pf.gamma_inf > std::min(pf.gamma0, fp.rho_max - fp.r)) {
    infeasible("gamma_inf " + fmt_num(pf.gamma_inf) + " outside (0, min(gamma0, rho_max - r)]");
  }
  if (!std::isfinite(pf.l) || pf.l < 0.0) infeasible("decay rate l must be finite and >= 0");
  if (fp.rho_max - pf.gamma0 < fp.r) {
    double target = fp.rho_max - fp.r;
    double reached = pf(fp.t_star);
    if (std::abs(reached - target) > 1e-12 * std::abs(target)) {
      infeasible("gamma(t_star) = " + fmt_num(reached) + " differs from rho_max - r = " +
                 fmt_num(target));
    }
  }
}

FunnelParams synthesize_funnel(const SynthesisProblem& p, const SynthesisConfig& cfg) {
  const double floor0 = std::max(0.0, p.rho0);
  if (!(p.rho_opt > 0.0)) {
    infeasible("rho_opt = " + fmt_num(p.rho_opt) + " is not positive, the task is unsatisfiable");
  }
  const double headroom = p.rho_opt - floor0;
  if (!(headroom > 0.0)) {
    infeasible("rho0 = " + fmt_num(p.rho0) + " already at rho_opt, no room for rho_max");
  }
  const double chi = cfg.chi.value_or(cfg.chi_fraction * headroom);
  if (!(chi > 0.0) || !(chi < headroom)) {
    infeasible("chi " + fmt_num(chi) + " too large, need chi < " + fmt_num(headroom));
  }

  FunnelParams fp;
  if (cfg.t_star) {
    fp.t_star = *cfg.t_star;
  } else {
    fp.t_star = p.op == TemporalOp::Always ? p.window.lo : p.window.hi;
  }
  fp.rho_max = cfg.rho_max.value_or(p.rho_opt - chi);
  fp.r = cfg.r.value_or(cfg.r_fraction * fp.rho_max);

  if (fp.t_star == 0.0 && !(p.rho0 > fp.r)) {
    infeasible("t_star = 0 requires rho0 > r, got rho0 = " + fmt_num(p.rho0) +
               ", r = " + fmt_num(fp.r));
  }

  auto& pf = fp.perf;
  if (cfg.gamma0) {
    pf.gamma0 = *cfg.gamma0;
  } else if (fp.t_star > 0.0) {
    if (cfg.gamma0_scale) {
      if (!(*cfg.gamma0_scale > 1.0)) infeasible("gamma0_scale must exceed 1");
      pf.gamma0 = *cfg.gamma0_scale * (fp.rho_max - p.rho0);
    } else {
      pf.gamma0 = (fp.rho_max - p.rho0) + cfg.gamma0_margin * fp.rho_max;
    }
  } else {
    pf.gamma0 = fp.rho_max - fp.r;
  }

  const bool must_decay = pf.gamma0 > fp.rho_max - fp.r;
  if (cfg.gamma_inf) {
    pf.gamma_inf = *cfg.gamma_inf;
  } else if (must_decay) {
    pf.gamma_inf = cfg.gamma_inf_fraction * (fp.rho_max - fp.r);
  } else {
    pf.gamma_inf = std::min(pf.gamma0, fp.rho_max - fp.r);
  }

  if (must_decay) {
    if (!(fp.t_star > 0.0)) infeasible("gamma must decay but t_star = 0");
    if (!(pf.gamma_inf < fp.rho_max - fp.r)) {
      infeasible("gamma_inf must be below rho_max - r for a finite decay rate");
    }
    pf.l = decay_rate_for(pf.gamma0, pf.gamma_inf, fp.rho_max, fp.r, fp.t_star);
    if (cfg.l && !close(*cfg.l, pf.l)) {
      infeasible("requested l " + fmt_num(*cfg.l) + " differs from the required " + fmt_num(pf.l));
    }
  } else {
    pf.l = cfg.l.value_or(0.0);
  }

  validate_funnel(fp, p, chi);
  return fp;
}

FunnelParams synthesize_funnel(const AtomicTask& task, const Vector& x0,
                               const SynthesisConfig& cfg,
                               const SmoothingConfig& smoothing, double elapsed) {
  SynthesisProblem p;
  p.op = task.op;
  p.window = task.schedule;
  if (task.absolute_time) {
    p.window.lo -= elapsed;
    p.window.hi -= elapsed;
  }
  p.rho0 = smooth_robustness(task.psi, x0, smoothing);
  p.rho_opt = optimize_robustness(task.psi, smoothing, x0).rho_opt;
  return synthesize_funnel(p, cfg);
}

}  // namespace etstl
