#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "etstl/controller.hpp"
#include "etstl/formula.hpp"

namespace etstl {

/// xdot = f(x) + g(x) u + w with |w_j| <= noise_bound.
struct Plant {
  std::string name;
  int state_dim = 0;
  int input_dim = 0;
  std::function<Vector(const Vector&)> drift;  // empty means f = 0
  ActuationFn actuation;
  double noise_bound = 0.0;

  Vector dynamics(const Vector& x, const Vector& u, const Vector& w) const;
};

struct OmniTeamConfig {
  int agents = 3;
  double body_radius = 0.2;   // L
  double wheel_radius = 0.02; // R
  /// Read x3 as degrees inside Rot(x3); the printed g is otherwise unchanged.
  bool orientation_degrees = false;
};

/// Geometric wheel matrix B for body radius L.
Matrix omni_wheel_matrix(double body_radius);

/// Per agent: Rot(x3) (B^T)^{-1} R acting on (x1, x2, x3); agents stacked
/// block-diagonally; f = 0.
Plant omni_team_plant(const OmniTeamConfig& cfg = {});

/// xdot = u on R^dim.
Plant single_integrator(int dim);

/// Smallest eigenvalue of g(x) g(x)^T.
double min_gram_eigenvalue(const Plant& plant, const Vector& x);

/// Throws Error unless g g^T is positive definite at every column of `states`.
void check_actuation(const Plant& plant, const Matrix& states);

/// Classical RK4 with u and w held over the step.
Vector step_rk4(const Plant& plant, const Vector& x, const Vector& u,
                const Vector& w, double dt);

/// Per-step noise, iid uniform on [-bound, bound]^n. mt19937_64 with the top
/// 53 bits mapped to [0, 1), so streams are identical across standard
/// libraries.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  Vector sample(int dim, double bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace etstl
