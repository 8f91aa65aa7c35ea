#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "etstl/formula.hpp"
#include "etstl/funnel.hpp"
#include "etstl/robustness.hpp"

namespace etstl {

/// g(x): n x m input matrix. The controller never sees the drift.
using ActuationFn = std::function<Matrix(const Vector&)>;

/// u(x, t) = -k * eps(x, t) * g(x)^T * grad rho(x), with t local to the
/// funnel. k = 1 is the plain law; k > 0 is the same law for the scaled
/// actuation sqrt(k) g.
struct FeedbackLaw {
  Conjunction psi;
  FunnelParams funnel;
  SmoothingConfig smoothing;
  double gain = 1.0;
  ActuationFn actuation;

  Vector operator()(const Vector& x, double t) const;
  /// Writes u into `out` and returns the transformed error.
  TransformedError evaluate(const Vector& x, double t, Vector& out) const;
  /// Normalized error without computing u.
  double xi(const Vector& x, double t) const;
};

Vector continuous_law(const Vector& x, double t, const Conjunction& psi,
                      const FunnelParams& fp, const Matrix& g,
                      const SmoothingConfig& smoothing = {}, double gain = 1.0);

struct TriggerConfig {
  double delta_u = 50.0;
  double lipschitz_safety = 2.0;
  double delta_x0 = 0.5;
  double delta_t0 = 0.5;
  double shrink = 0.5;
  int sample_count = 256;
  double delta_floor = 1e-6;
  /// Corner points of the (x, t) box added to the quasi-random samples.
  int max_corners = 1024;
  /// Boxes are admissible when every sample keeps xi inside
  /// (-1 + xi_margin, -xi_margin).
  double xi_margin = 1e-3;
  /// After the first admissible box, keep shrinking while the Lipschitz term
  /// binds and use the box that gives the largest radius.
  bool refine_box = true;

  void validate() const;
};

enum class TriggerCause { Initial, StateDeviation, MaxInterval, ModeSwitch };

std::string_view to_string(TriggerCause cause);

struct TriggerRadius {
  double delta = 0.0;
  double lipschitz = 0.0;
  double delta_x = 0.0;
  double delta_t = 0.0;
  int shrinks = 0;
};

/// delta_i = min(delta_u / L_z, delta_x, delta_t). L_z is the largest
/// central-difference Jacobian inf-norm of u over quasi-random points and
/// corners of the box B(x_i, delta_x) x [t_i, t_i + delta_t], times the safety
/// factor. The box shrinks until xi stays admissible on every sample; with
/// `refine_box` smaller nested boxes are tried as well and the largest
/// resulting radius wins.
TriggerRadius compute_trigger_radius(const FeedbackLaw& law, const Vector& x_i,
                                     double t_i, const TriggerConfig& tc);

/// Points of the (x, t) box used by compute_trigger_radius: Halton samples
/// followed by corners. Columns are (x, t).
Matrix trigger_box_samples(const Vector& x_i, double t_i, double delta_x,
                           double delta_t, const TriggerConfig& tc);

/// max_i sum_j |du_i/dz_j| by central differences at z = (x, t).
double law_jacobian_inf_norm(const FeedbackLaw& law, const Vector& x, double t);

struct TriggerEvent {
  long index = 0;
  double time = 0.0;  // global
  Vector state;
  Vector input;
  double delta = 0.0;
  double lipschitz = 0.0;
  TriggerCause cause = TriggerCause::Initial;
  int mode = 1;
};

/// Trigger condition with strict inequalities; state deviation wins ties.
std::optional<TriggerCause> should_trigger(const Vector& x, double t,
                                           const TriggerEvent& last);

/// Event-triggered hold around a feedback law. Single owner per episode.
class EventTriggeredController {
 public:
  explicit EventTriggeredController(TriggerConfig tc);

  /// Samples the law at (x, t_local), computes the radius and logs an event
  /// at global time t.
  const TriggerEvent& fire(const FeedbackLaw& law, const Vector& x, double t,
                           double t_local, TriggerCause cause, int mode);

  std::optional<TriggerCause> should_trigger(const Vector& x, double t) const;

  bool has_event() const { return !events_.empty(); }
  const TriggerEvent& last() const { return events_.back(); }
  const Vector& held_input() const;
  const std::vector<TriggerEvent>& events() const { return events_; }
  const TriggerConfig& config() const { return config_; }

 private:
  TriggerConfig config_;
  std::vector<TriggerEvent> events_;
};

}  // namespace etstl
