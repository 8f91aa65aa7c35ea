#include "etstl/plant.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "etstl/error.hpp"

namespace etstl {

Vector Plant::dynamics(const Vector& x, const Vector& u, const Vector& w) const {
  Vector dx = actuation(x) * u + w;
  if (drift) dx += drift(x);
  return dx;
}

Matrix omni_wheel_matrix(double body_radius) {
  const double c = std::cos(std::numbers::pi / 6.0);
  const double s = std::sin(std::numbers::pi / 6.0);
  const double L = body_radius;
  Matrix B(3, 3);
  B << 0.0, c, -c,
      -1.0, s, s,
       L, L, L;
  return B;
}

Plant omni_team_plant(const OmniTeamConfig& cfg) {
  if (cfg.agents < 1) throw Error("omni team needs at least one agent");
  if (!(cfg.body_radius > 0.0) || !(cfg.wheel_radius > 0.0)) {
    throw Error("omni team radii must be positive");
  }
  Matrix B = omni_wheel_matrix(cfg.body_radius);
  Eigen::FullPivLU<Matrix> lu(B.transpose());
  if (!lu.isInvertible()) throw Error("omni wheel matrix is singular");
  const Matrix body = lu.inverse() * cfg.wheel_radius;
  const double to_rad = cfg.orientation_degrees ? std::numbers::pi / 180.0 : 1.0;

  Plant p;
  p.name = "omni_team";
  p.state_dim = 3 * cfg.agents;
  p.input_dim = 3 * cfg.agents;
  const int agents = cfg.agents;
  p.actuation = [body, agents, to_rad](const Vector& x) {
    Matrix g = Matrix::Zero(3 * agents, 3 * agents);
    for (int a = 0; a < agents; ++a) {
      const double th = x[3 * a + 2] * to_rad;
      const double c = std::cos(th);
      const double s = std::sin(th);
      auto blk = g.block(3 * a, 3 * a, 3, 3);
      blk.row(0) = c * body.row(0) - s * body.row(1);
      blk.row(1) = s * body.row(0) + c * body.row(1);
      blk.row(2) = body.row(2);
    }
    return g;
  };
  return p;
}

Plant single_integrator(int dim) {
  if (dim < 1) throw Error("single integrator needs dim >= 1");
  Plant p;
  p.name = "single_integrator";
  p.state_dim = dim;
  p.input_dim = dim;
  p.actuation = [dim](const Vector&) { return Matrix::Identity(dim, dim); };
  return p;
}

double min_gram_eigenvalue(const Plant& plant, const Vector& x) {
  Matrix g = plant.actuation(x);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g * g.transpose(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_actuation(const Plant& plant, const Matrix& states) {
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    double lam = min_gram_eigenvalue(plant, states.col(c));
    if (!(lam > 0.0)) {
      throw Error("g(x) g(x)^T is not positive definite at sample " + std::to_string(c) +
                  " (smallest eigenvalue " + std::to_string(lam) + ")");
    }
  }
}

Vector step_rk4(const Plant& plant, const Vector& x, const Vector& u,
                const Vector& w, double dt) {
  Vector k1 = plant.dynamics(x, u, w);
  Vector k2 = plant.dynamics(x + 0.5 * dt * k1, u, w);
  Vector k3 = plant.dynamics(x + 0.5 * dt * k2, u, w);
  Vector k4 = plant.dynamics(x + dt * k3, u, w);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double NoiseSource::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

Vector NoiseSource::sample(int dim, double bound) {
  Vector w(dim);
  for (int j = 0; j < dim; ++j) w[j] = bound * (2.0 * uniform01() - 1.0);
  return w;
}

}  // namespace etstl
