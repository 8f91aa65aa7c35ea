#include "etstl/controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "etstl/error.hpp"

namespace etstl {

TransformedError FeedbackLaw::evaluate(const Vector& x, double t, Vector& out) const {
  thread_local Vector grad;
  double rho = smooth_robustness(psi, x, smoothing, grad);
  TransformedError te = transformed_error(rho, funnel, t);
  out.noalias() = (-gain * te.eps) * (actuation(x).transpose() * grad);
  return te;
}

Vector FeedbackLaw::operator()(const Vector& x, double t) const {
  Vector u;
  evaluate(x, t, u);
  return u;
}

double FeedbackLaw::xi(const Vector& x, double t) const {
  return (smooth_robustness(psi, x, smoothing) - funnel.rho_max) / funnel.perf(t);
}

Vector continuous_law(const Vector& x, double t, const Conjunction& psi,
                      const FunnelParams& fp, const Matrix& g,
                      const SmoothingConfig& smoothing, double gain) {
  Vector grad;
  double rho = smooth_robustness(psi, x, smoothing, grad);
  TransformedError te = transformed_error(rho, fp, t);
  return (-gain * te.eps) * (g.transpose() * grad);
}

void TriggerConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Error(std::string("trigger config: ") + name + " must be positive");
  };
  positive(delta_u, "delta_u");
  positive(delta_x0, "delta_x0");
  positive(delta_t0, "delta_t0");
  positive(delta_floor, "delta_floor");
  if (!(lipschitz_safety >= 1.0)) throw Error("trigger config: lipschitz_safety must be >= 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw Error("trigger config: shrink must lie in (0, 1)");
  if (sample_count < 1) throw Error("trigger config: sample_count must be >= 1");
  if (max_corners < 0) throw Error("trigger config: max_corners must be >= 0");
  if (!(xi_margin >= 0.0 && xi_margin < 0.5)) throw Error("trigger config: xi_margin must lie in [0, 0.5)");
}

std::string_view to_string(TriggerCause cause) {
  switch (cause) {
    case TriggerCause::Initial: return "Initial";
    case TriggerCause::StateDeviation: return "StateDeviation";
    case TriggerCause::MaxInterval: return "MaxInterval";
    case TriggerCause::ModeSwitch: return "ModeSwitch";
  }
  return "Unknown";
}

namespace {

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  for (int c = 2; static_cast<int>(primes.size()) < count; ++c) {
    bool prime = std::none_of(primes.begin(), primes.end(), [c](int p) {
      return p * p <= c && c % p == 0;
    });
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Matrix trigger_box_samples(const Vector& x_i, double t_i, double delta_x,
                           double delta_t, const TriggerConfig& tc) {
  const Eigen::Index n = x_i.size();
  const int dims = static_cast<int>(n) + 1;
  thread_local std::vector<int> primes;
  if (static_cast<int>(primes.size()) < dims) primes = first_primes(dims);

  long corners = tc.max_corners;
  bool all_corners = false;
  if (dims < 62 && (1L << dims) <= tc.max_corners) {
    corners = 1L << dims;
    all_corners = true;
  }
  Matrix pts(dims, 1 + tc.sample_count + corners);
  pts.col(0).head(n) = x_i;
  pts(n, 0) = t_i;

  for (int s = 0; s < tc.sample_count; ++s) {
    auto idx = static_cast<std::uint64_t>(s + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
      pts(j, 1 + s) = x_i[j] + delta_x * (2.0 * radical_inverse(idx, primes[j]) - 1.0);
    }
    pts(n, 1 + s) = t_i + delta_t * radical_inverse(idx, primes[n]);
  }

  for (long c = 0; c < corners; ++c) {
    std::uint64_t bits = all_corners ? static_cast<std::uint64_t>(c)
                                     : splitmix64(static_cast<std::uint64_t>(c));
    Eigen::Index col = 1 + tc.sample_count + c;
    for (Eigen::Index j = 0; j < n; ++j) {
      pts(j, col) = x_i[j] + ((bits >> (j % 64)) & 1U ? delta_x : -delta_x);
    }
    pts(n, col) = t_i + ((bits >> (n % 64)) & 1U ? delta_t : 0.0);
  }
  return pts;
}

double law_jacobian_inf_norm(const FeedbackLaw& law, const Vector& x, double t) {
  thread_local Vector z, up, um, rows;
  const Eigen::Index n = x.size();
  z = x;
  bool first = true;
  for (Eigen::Index j = 0; j <= n; ++j) {
    double base = j < n ? x[j] : t;
    double h = 1e-6 * std::max(1.0, std::abs(base));
    if (j < n) {
      z[j] = base + h;
      law.evaluate(z, t, up);
      z[j] = base - h;
      law.evaluate(z, t, um);
      z[j] = base;
    } else {
      law.evaluate(z, t + h, up);
      law.evaluate(z, t - h, um);
    }
    if (first) {
      rows.setZero(up.size());
      first = false;
    }
    rows += ((up - um) / (2.0 * h)).cwiseAbs();
  }
  return rows.size() == 0 ? 0.0 : rows.maxCoeff();
}

namespace {

bool box_admissible(const FeedbackLaw& law, const Matrix& pts, const TriggerConfig& tc) {
  thread_local Vector x;
  const Eigen::Index n = pts.rows() - 1;
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    x = pts.col(c).head(n);
    double xi = law.xi(x, pts(n, c));
    if (!(xi > -1.0 + tc.xi_margin && xi < -tc.xi_margin)) return false;
  }
  return true;
}

double box_lipschitz(const FeedbackLaw& law, const Matrix& pts) {
  thread_local Vector x;
  const Eigen::Index n = pts.rows() - 1;
  double lz = 0.0;
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    x = pts.col(c).head(n);
    lz = std::max(lz, law_jacobian_inf_norm(law, x, pts(n, c)));
  }
  return lz;
}

}  // namespace

TriggerRadius compute_trigger_radius(const FeedbackLaw& law, const Vector& x_i,
                                     double t_i, const TriggerConfig& tc) {
  double dx = tc.delta_x0;
  double dt = tc.delta_t0;
  int shrinks = 0;
  Matrix pts;
  while (true) {
    if (std::min(dx, dt) < tc.delta_floor) {
      throw TriggerFloorError("trigger box shrank below the floor " +
                              std::to_string(tc.delta_floor) + " at t=" + std::to_string(t_i) +
                              ": state is too close to the funnel boundary");
    }
    pts = trigger_box_samples(x_i, t_i, dx, dt, tc);
    if (box_admissible(law, pts, tc)) break;
    dx *= tc.shrink;
    dt *= tc.shrink;
    ++shrinks;
  }

  TriggerRadius best;
  bool have = false;
  while (true) {
    TriggerRadius cand;
    cand.delta_x = dx;
    cand.delta_t = dt;
    cand.shrinks = shrinks;
    cand.lipschitz = tc.lipschitz_safety * box_lipschitz(law, pts);
    cand.delta = std::min(dx, dt);
    bool box_bound = true;
    if (cand.lipschitz > 0.0 && tc.delta_u / cand.lipschitz < cand.delta) {
      cand.delta = tc.delta_u / cand.lipschitz;
      box_bound = false;
    }
    if (!have || cand.delta > best.delta) {
      best = cand;
      have = true;
    }
    // A smaller box can only pay off while the Lipschitz term binds and the
    // box is still wider than the best radius so far.
    if (!tc.refine_box || box_bound) break;
    dx *= tc.shrink;
    dt *= tc.shrink;
    ++shrinks;
    if (std::min(dx, dt) <= best.delta || std::min(dx, dt) < tc.delta_floor) break;
    pts = trigger_box_samples(x_i, t_i, dx, dt, tc);
    if (!box_admissible(law, pts, tc)) break;
  }

  if (best.delta < tc.delta_floor) {
    throw TriggerFloorError("trigger radius " + std::to_string(best.delta) +
                            " below the floor at t=" + std::to_string(t_i));
  }
  return best;
}

std::optional<TriggerCause> should_trigger(const Vector& x, double t,
                                           const TriggerEvent& last) {
  if ((x - last.state).lpNorm<Eigen::Infinity>() > last.delta) {
    return TriggerCause::StateDeviation;
  }
  if (t - last.time > last.delta) return TriggerCause::MaxInterval;
  return std::nullopt;
}

EventTriggeredController::EventTriggeredController(TriggerConfig tc)
    : config_(tc) {
  config_.validate();
}

const TriggerEvent& EventTriggeredController::fire(const FeedbackLaw& law,
                                                   const Vector& x, double t,
                                                   double t_local, TriggerCause cause,
                                                   int mode) {
  TriggerEvent ev;
  ev.index = static_cast<long>(events_.size());
  ev.time = t;
  ev.state = x;
  law.evaluate(x, t_local, ev.input);
  TriggerRadius radius = compute_trigger_radius(law, x, t_local, config_);
  ev.delta = radius.delta;
  ev.lipschitz = radius.lipschitz;
  ev.cause = cause;
  ev.mode = mode;
  events_.push_back(std::move(ev));
  return events_.back();
}

std::optional<TriggerCause> EventTriggeredController::should_trigger(const Vector& x,
                                                                     double t) const {
  if (events_.empty()) return TriggerCause::Initial;
  return etstl::should_trigger(x, t, events_.back());
}

const Vector& EventTriggeredController::held_input() const {
  if (events_.empty()) throw Error("held_input queried before the first event");
  return events_.back().input;
}

}  // namespace etstl
