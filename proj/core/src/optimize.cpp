#include "etstl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "etstl/error.hpp"

namespace etstl {

Vector default_start(const Conjunction& psi, std::size_t dim) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(dim));
  Vector count = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& lit : psi.literals) {
    if (const auto* band = std::get_if<BandPredicate>(&lit.predicate)) {
      sum[band->index] += band->center;
      count[band->index] += 1.0;
      continue;
    }
    const auto* ball = std::get_if<BallPredicate>(&lit.predicate);
    if (ball == nullptr) continue;
    for (std::size_t k = 0; k < ball->selector.size(); ++k) {
      sum[ball->selector[k]] += ball->center[static_cast<Eigen::Index>(k)];
      count[ball->selector[k]] += 1.0;
    }
  }
  for (Eigen::Index j = 0; j < sum.size(); ++j) {
    if (count[j] > 0.0) sum[j] /= count[j];
  }
  return sum;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kModelFraction = 0.25;

// Affine set {x : A x = c} on which a Ball/Join/Band norm vanishes.
struct Kink {
  std::size_t literal;
  Matrix A;
  Vector c;

  double distance(const Vector& x) const { return (A * x - c).norm(); }
};

std::vector<Kink> collect_kinks(const Conjunction& psi, Eigen::Index n) {
  std::vector<Kink> kinks;
  for (std::size_t i = 0; i < psi.literals.size(); ++i) {
    const auto& lit = psi.literals[i];
    if (lit.negated) continue;
    if (const auto* b = std::get_if<BallPredicate>(&lit.predicate)) {
      Kink k{i, Matrix::Zero(static_cast<Eigen::Index>(b->selector.size()), n), b->center};
      for (std::size_t r = 0; r < b->selector.size(); ++r) {
        k.A(static_cast<Eigen::Index>(r), b->selector[r]) = 1.0;
      }
      kinks.push_back(std::move(k));
    } else if (const auto* j = std::get_if<JoinPredicate>(&lit.predicate)) {
      auto rows = static_cast<Eigen::Index>(j->first.size());
      Kink k{i, Matrix::Zero(rows, n), Vector::Zero(rows)};
      for (Eigen::Index r = 0; r < rows; ++r) {
        k.A(r, j->first[static_cast<std::size_t>(r)]) += 1.0;
        k.A(r, j->second[static_cast<std::size_t>(r)]) -= 1.0;
      }
      kinks.push_back(std::move(k));
    } else if (const auto* bd = std::get_if<BandPredicate>(&lit.predicate)) {
      Kink k{i, Matrix::Zero(1, n), Vector::Constant(1, bd->center)};
      k.A(0, bd->index) = 1.0;
      kinks.push_back(std::move(k));
    }
  }
  return kinks;
}

// Adds -weight * D^T (I - u u^T) D / ||D x - c|| for a Ball or Join leaf,
// where D maps x to the difference vector inside the norm.
void add_norm_curvature(const Predicate& p, const Vector& x, double weight, Matrix& H) {
  std::vector<std::pair<int, int>> pairs;  // (plus index, minus index or -1)
  Vector v;
  if (const auto* b = std::get_if<BallPredicate>(&p)) {
    v.resize(static_cast<Eigen::Index>(b->selector.size()));
    for (std::size_t r = 0; r < b->selector.size(); ++r) {
      v[static_cast<Eigen::Index>(r)] = x[b->selector[r]] - b->center[static_cast<Eigen::Index>(r)];
      pairs.emplace_back(b->selector[r], -1);
    }
  } else if (const auto* j = std::get_if<JoinPredicate>(&p)) {
    v.resize(static_cast<Eigen::Index>(j->first.size()));
    for (std::size_t r = 0; r < j->first.size(); ++r) {
      v[static_cast<Eigen::Index>(r)] = x[j->first[r]] - x[j->second[r]];
      pairs.emplace_back(j->first[r], j->second[r]);
    }
  } else {
    return;
  }
  const double rho = v.norm();
  if (!(rho > 0.0)) return;
  const Eigen::Index m = v.size();
  Matrix C = Matrix::Identity(m, m) - (v / rho) * (v / rho).transpose();
  C *= -weight / rho;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto [pa, ma] = pairs[static_cast<std::size_t>(a)];
      const auto [pb, mb] = pairs[static_cast<std::size_t>(b)];
      H(pa, pb) += C(a, b);
      if (mb >= 0) H(pa, mb) -= C(a, b);
      if (ma >= 0) H(ma, pb) -= C(a, b);
      if (ma >= 0 && mb >= 0) H(ma, mb) += C(a, b);
    }
  }
}

class Objective {
 public:
  Objective(const Conjunction& psi, const SmoothingConfig& s)
      : psi_(psi), smoothing_(s), h_(psi.literals.size()), w_(psi.literals.size()) {}

  double value(const Vector& x) const { return smooth_robustness(psi_, x, smoothing_); }

  // Gradient with the literals in `skip` left out; their norm terms are
  // handled through the active set. Softmin weights are kept in weights().
  void gradient(const Vector& x, const std::vector<bool>& skip, Vector& grad) {
    const std::size_t m = psi_.literals.size();
    double lo = INFINITY;
    for (std::size_t i = 0; i < m; ++i) {
      h_[i] = literal_value(psi_.literals[i], x);
      lo = std::min(lo, h_[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      w_[i] = std::exp(-smoothing_.eta * (h_[i] - lo));
      sum += w_[i];
    }
    grad.setZero(x.size());
    for (std::size_t i = 0; i < m; ++i) {
      w_[i] /= sum;
      if (!skip[i]) add_literal_gradient(psi_.literals[i], x, w_[i], grad);
    }
  }

  const std::vector<double>& weights() const { return w_; }

  // Hessian of the smoothed objective at the point of the last gradient()
  // call, with the same literals skipped. Band and affine leaves are
  // piecewise linear and contribute only through the softmin coupling.
  void hessian(const Vector& x, const std::vector<bool>& skip, const Vector& grad, Matrix& H) {
    const Eigen::Index n = x.size();
    H.setZero(n, n);
    Vector gi(n);
    for (std::size_t i = 0; i < psi_.literals.size(); ++i) {
      if (skip[i]) continue;
      const auto& lit = psi_.literals[i];
      gi.setZero();
      add_literal_gradient(lit, x, 1.0, gi);
      H.noalias() -= smoothing_.eta * w_[i] * gi * gi.transpose();
      add_norm_curvature(lit.predicate, x, w_[i], H);
    }
    H.noalias() += smoothing_.eta * grad * grad.transpose();
  }

 private:
  const Conjunction& psi_;
  SmoothingConfig smoothing_;
  std::vector<double> h_;
  std::vector<double> w_;
};

struct ActiveSet {
  std::vector<std::size_t> members;  // indices into the kink list
  Matrix A;
  Vector c;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;

  void rebuild(const std::vector<Kink>& kinks, Eigen::Index n) {
    Eigen::Index rows = 0;
    for (auto k : members) rows += kinks[k].A.rows();
    A.resize(rows, n);
    c.resize(rows);
    Eigen::Index r = 0;
    for (auto k : members) {
      A.middleRows(r, kinks[k].A.rows()) = kinks[k].A;
      c.segment(r, kinks[k].c.size()) = kinks[k].c;
      r += kinks[k].A.rows();
    }
    if (rows > 0) cod.compute(A);
  }

  bool empty() const { return members.empty(); }

  Vector snap(const Vector& x) const {
    if (empty()) return x;
    return x - cod.solve(A * x - c);
  }

  Vector project(const Vector& g) const {
    if (empty()) return g;
    return g - cod.solve(A * g);
  }
};

// Min-norm element g - A^T v of the superdifferential on the active kinks,
// over ||v_k|| <= radii[k]. Accelerated projected gradient from v0.
Vector min_norm_supergradient(const ActiveSet& active, const std::vector<Kink>& kinks,
                              const std::vector<double>& radii, const Vector& g,
                              const Vector& v0) {
  const Matrix& A = active.A;
  auto project = [&](Vector v) {
    Eigen::Index row = 0;
    for (std::size_t pos = 0; pos < active.members.size(); ++pos) {
      const Eigen::Index rows = kinks[active.members[pos]].A.rows();
      auto seg = v.segment(row, rows);
      const double norm = seg.norm();
      if (norm > radii[pos]) seg *= radii[pos] / norm;
      row += rows;
    }
    return v;
  };
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A * A.transpose(), Eigen::EigenvaluesOnly);
  const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  Vector v = project(v0);
  Vector y = v;
  double t = 1.0;
  for (int it = 0; it < 20000; ++it) {
    Vector next = project(y - A * (A.transpose() * y - g) / L);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - v);
    const double change = (next - v).norm();
    v = std::move(next);
    t = t_next;
    if (change <= 1e-16 * (1.0 + v.norm())) break;
  }
  return g - A.transpose() * v;
}

}  // namespace

OptimizationResult optimize_robustness(const Conjunction& psi,
                                       const SmoothingConfig& smoothing,
                                       const std::optional<Vector>& x_init,
                                       const OptimizerConfig& cfg) {
  if (psi.literals.empty()) throw FormulaError("cannot optimize an empty conjunction");
  if (!is_concave(psi)) {
    throw FormulaError("robustness maximization needs a concave formula (negated non-affine literal)");
  }
  const std::size_t need = required_dimension(psi);
  Vector x = x_init ? *x_init : default_start(psi, need);
  if (static_cast<std::size_t>(x.size()) < need) {
    throw FormulaError("start point has dimension " + std::to_string(x.size()) +
                       ", formula needs " + std::to_string(need));
  }
  const Eigen::Index n = x.size();
  const Vector origin = x;

  Objective obj(psi, smoothing);
  const std::vector<Kink> kinks = collect_kinks(psi, n);
  std::vector<bool> released(kinks.size(), false);
  std::vector<bool> skip(psi.literals.size(), false);
  ActiveSet active;

  auto tau = [&] { return 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>()); };
  auto slack = [](double f) { return 1e-12 * (1.0 + std::abs(f)); };

  auto set_active = [&](std::vector<std::size_t> members) {
    active.members = std::move(members);
    active.rebuild(kinks, n);
    std::fill(skip.begin(), skip.end(), false);
    for (auto k : active.members) skip[kinks[k].literal] = true;
  };

  // Adds kink k if snapping onto it does not lose value.
  auto try_activate = [&](std::size_t k, double fx) {
    ActiveSet trial;
    trial.members = active.members;
    trial.members.push_back(k);
    trial.rebuild(kinks, n);
    Vector xs = trial.snap(x);
    double fs = obj.value(xs);
    if (fs < fx - slack(fx)) return false;
    x = xs;
    set_active(trial.members);
    return true;
  };

  double step = 1.0;
  double newton_step = 1.0;
  Matrix H(n, n);
  Vector g(n);
  Vector trial(n);
  Vector gt(n);
  OptimizationResult out;
  bool converged = false;

  for (long iter = 0; iter < cfg.max_iterations; ++iter) {
    if ((x - origin).norm() > cfg.escape_radius) {
      throw OptimizationError("robustness appears unbounded above (iterate escaped radius " +
                              std::to_string(cfg.escape_radius) + ")");
    }
    double fx = obj.value(x);
    for (std::size_t k = 0; k < kinks.size(); ++k) {
      bool is_active = std::find(active.members.begin(), active.members.end(), k) !=
                       active.members.end();
      double dist = kinks[k].distance(x);
      if (released[k]) {
        if (dist > 10.0 * tau()) released[k] = false;
        continue;
      }
      if (!is_active && dist < tau() && try_activate(k, fx)) fx = obj.value(x);
    }
    x = active.snap(x);
    fx = obj.value(x);

    obj.gradient(x, skip, g);
    Vector d = active.project(g);
    double gn = d.norm();

    if (gn <= cfg.tolerance) {
      if (active.empty()) {
        out.iterations = iter;
        out.grad_norm = gn;
        converged = true;
        break;
      }
      // Stationary on the kink manifold iff g = sum_k A_k^T v_k with
      // ||v_k|| <= w_k. The least-squares multipliers settle most cases.
      Eigen::CompleteOrthogonalDecomposition<Matrix> codt(active.A.transpose());
      Vector lambda = codt.solve(g);
      std::vector<double> radii;
      bool fits = true;
      Eigen::Index row = 0;
      for (auto k : active.members) {
        radii.push_back(obj.weights()[kinks[k].literal]);
        const Eigen::Index rows = kinks[k].A.rows();
        if (lambda.segment(row, rows).norm() > radii.back() * (1.0 + 1e-6)) fits = false;
        row += rows;
      }
      Vector r = fits ? Vector::Zero(n) : min_norm_supergradient(active, kinks, radii, g, lambda);
      const double rn = r.norm();
      if (rn <= cfg.tolerance) {
        out.iterations = iter;
        out.grad_norm = std::max(gn, rn);
        converged = true;
        break;
      }
      // r is the steepest ascent direction. Leave the kinks it moves off.
      double s = 1.0;
      bool moved = false;
      while (s > 1e-30) {
        trial = x + s * r;
        double ft = obj.value(trial);
        if (ft > fx + cfg.armijo_slope * s * rn * rn ||
            (ft >= fx && std::abs(ft - fx) <= 64.0 * kEps * (1.0 + std::abs(fx)))) {
          moved = true;
          break;
        }
        s *= cfg.armijo_shrink;
      }
      if (!moved) {
        std::ostringstream os;
        os << "stalled on a kink with steepest ascent norm " << rn;
        throw OptimizationError(os.str());
      }
      std::vector<std::size_t> keep;
      for (auto k : active.members) {
        if ((kinks[k].A * r).norm() > 1e-6 * rn) {
          released[k] = true;
        } else {
          keep.push_back(k);
        }
      }
      x = trial;
      set_active(std::move(keep));
      continue;
    }

    // Regularized Newton direction in the null space of the active kinks:
    // (P(-H)P + mu I) dn = P g with mu = ||P g|| keeps dn an ascent
    // direction when -H is singular. Plain ascent is the fallback.
    obj.hessian(x, skip, g, H);
    Matrix M = -H;
    if (!active.empty()) {
      Matrix P = Matrix::Identity(n, n) - active.cod.solve(active.A);
      M = P * M * P;
    }
    M.diagonal().array() += gn;
    // The solve leaks a little outside the null space when mu is small.
    Vector dn = active.project(M.ldlt().solve(d));

    // Steps must realize a fraction of the increase predicted by the local
    // model s g'dir - s^2 curv / 2. Plain Armijo (curv = 0) lets a doubled
    // Newton step land mirrored about the optimum and cycle there.
    auto search = [&](const Vector& dir, double s, double curv, double fraction) {
      const double slope = d.dot(dir);
      if (!(slope > 0.0) || !dir.allFinite()) return -1.0;
      while (s > 1e-30) {
        trial = x + s * dir;
        double ft = obj.value(trial);
        // Below the resolution of f the sufficient-increase test is noise and
        // a rounding tie would pass it. Fall back to the slope at the trial
        // point: on a quadratic, a slope above -slope/2 means the step stayed
        // short of 1.5 times the line maximum and so increased f.
        if (std::abs(ft - fx) <= 64.0 * kEps * (1.0 + std::abs(fx))) {
          obj.gradient(trial, skip, gt);
          if (dir.dot(active.project(gt)) >= -0.5 * slope) return s;
        } else {
          const double predicted = s * slope - 0.5 * s * s * curv;
          if (predicted > 0.0 && ft > fx && ft >= fx + fraction * predicted) return s;
        }
        s *= cfg.armijo_shrink;
      }
      return -1.0;
    };

    const double curv = dn.dot(M * dn);
    double s = search(dn, newton_step, curv, kModelFraction);
    bool accepted = s > 0.0;
    if (accepted) {
      newton_step = s < newton_step ? s : std::min(2.0 * s, 1e6);
    } else {
      newton_step = 1.0;
      s = search(d, step, 0.0, cfg.armijo_slope);
      accepted = s > 0.0;
      if (accepted) step = std::min(2.0 * s, 1e6);
    }
    if (!accepted) {
      // No ascent along d: a kink outside tau is blocking. Take the nearest.
      std::size_t nearest = kinks.size();
      double best = INFINITY;
      for (std::size_t k = 0; k < kinks.size(); ++k) {
        bool is_active = std::find(active.members.begin(), active.members.end(), k) !=
                         active.members.end();
        if (is_active) continue;
        double dist = kinks[k].distance(x);
        if (dist < best) {
          best = dist;
          nearest = k;
        }
      }
      if (nearest < kinks.size()) {
        released[nearest] = false;
        if (try_activate(nearest, fx)) continue;
      }
      std::ostringstream os;
      os << "line search stalled at gradient norm " << gn;
      throw OptimizationError(os.str());
    }
    x = trial;
  }
  if (!converged) {
    std::ostringstream os;
    os << "no convergence after " << cfg.max_iterations << " iterations";
    throw OptimizationError(os.str());
  }

  out.x_star = x;
  out.rho_opt = obj.value(x);
  return out;
}

}  // namespace etstl
