#include "etstl/robustness.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace etstl {

namespace {

// Small-buffer scratch for literal values; conjunctions are short.
constexpr std::size_t kInline = 16;

struct Scratch {
  double inline_buf[kInline];
  std::vector<double> heap;
  double* data;

  explicit Scratch(std::size_t n) {
    if (n <= kInline) {
      data = inline_buf;
    } else {
      heap.resize(n);
      data = heap.data();
    }
  }
};

double ball_offset_norm(const BallPredicate& b, const Vector& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.selector.size(); ++k) {
    double d = x[b.selector[k]] - b.center[static_cast<Eigen::Index>(k)];
    s += d * d;
  }
  return std::sqrt(s);
}

double join_norm(const JoinPredicate& j, const Vector& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < j.first.size(); ++k) {
    double d = x[j.first[k]] - x[j.second[k]];
    s += d * d;
  }
  return std::sqrt(s);
}

double affine_dot(const AffinePredicate& a, const Vector& x) {
  assert(a.weights.size() <= x.size());
  return a.weights.dot(x.head(a.weights.size()));
}

// grad += w * dh/dx
void add_predicate_gradient(const Predicate& p, const Vector& x, double w,
                            Vector& grad) {
  if (w == 0.0) return;
  std::visit(
      [&](const auto& pred) {
        using T = std::decay_t<decltype(pred)>;
        if constexpr (std::is_same_v<T, BallPredicate>) {
          double n = ball_offset_norm(pred, x);
          if (n == 0.0) return;
          for (std::size_t k = 0; k < pred.selector.size(); ++k) {
            double d = x[pred.selector[k]] - pred.center[static_cast<Eigen::Index>(k)];
            grad[pred.selector[k]] -= w * d / n;
          }
        } else if constexpr (std::is_same_v<T, JoinPredicate>) {
          double n = join_norm(pred, x);
          if (n == 0.0) return;
          for (std::size_t k = 0; k < pred.first.size(); ++k) {
            double d = (x[pred.first[k]] - x[pred.second[k]]) / n;
            grad[pred.first[k]] -= w * d;
            grad[pred.second[k]] += w * d;
          }
        } else if constexpr (std::is_same_v<T, AffinePredicate>) {
          grad.head(pred.weights.size()) -= w * pred.weights;
        } else {
          double d = x[pred.index] - pred.center;
          if (d > 0.0) grad[pred.index] -= w;
          else if (d < 0.0) grad[pred.index] += w;
        }
      },
      p);
}

}  // namespace

double predicate_value(const Predicate& p, const Vector& x) {
  return std::visit(
      [&](const auto& pred) -> double {
        using T = std::decay_t<decltype(pred)>;
        if constexpr (std::is_same_v<T, BallPredicate>) {
          return pred.radius - ball_offset_norm(pred, x);
        } else if constexpr (std::is_same_v<T, JoinPredicate>) {
          return pred.radius - join_norm(pred, x);
        } else if constexpr (std::is_same_v<T, AffinePredicate>) {
          return pred.offset - affine_dot(pred, x);
        } else {
          return pred.halfwidth - std::abs(x[pred.index] - pred.center);
        }
      },
      p);
}

ValueGrad predicate_value_and_grad(const Predicate& p, const Vector& x) {
  ValueGrad out;
  out.value = predicate_value(p, x);
  out.grad = Vector::Zero(x.size());
  add_predicate_gradient(p, x, 1.0, out.grad);
  return out;
}

double literal_value(const Literal& lit, const Vector& x) {
  double h = predicate_value(lit.predicate, x);
  return lit.negated ? -h : h;
}

void add_literal_gradient(const Literal& lit, const Vector& x, double weight,
                          Vector& grad) {
  add_predicate_gradient(lit.predicate, x, lit.negated ? -weight : weight, grad);
}

double exact_robustness(const Conjunction& psi, const Vector& x) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& lit : psi.literals) m = std::min(m, literal_value(lit, x));
  return m;
}

namespace {

// Fills h and returns min h.
double fill_values(const Conjunction& psi, const Vector& x, double* h) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < psi.literals.size(); ++i) {
    h[i] = literal_value(psi.literals[i], x);
    lo = std::min(lo, h[i]);
  }
  return lo;
}

// Overwrites h with unnormalized shifted weights and returns their sum minus
// the unit weight of the minimizing leaf, so the caller can use log1p.
double shifted_weights(double* h, std::size_t m, double lo, double eta) {
  double rest = 0.0;
  bool seen_min = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (!seen_min && h[i] == lo) {
      seen_min = true;
      h[i] = 1.0;
      continue;
    }
    h[i] = std::exp(-eta * (h[i] - lo));
    rest += h[i];
  }
  return rest;
}

}  // namespace

double smooth_robustness(const Conjunction& psi, const Vector& x,
                         const SmoothingConfig& cfg) {
  const std::size_t m = psi.literals.size();
  if (m == 1) return literal_value(psi.literals.front(), x);
  Scratch s(m);
  double lo = fill_values(psi, x, s.data);
  double rest = shifted_weights(s.data, m, lo, cfg.eta);
  return lo - std::log1p(rest) / cfg.eta;
}

double smooth_robustness(const Conjunction& psi, const Vector& x,
                         const SmoothingConfig& cfg, Vector& grad) {
  const std::size_t m = psi.literals.size();
  grad.setZero(x.size());
  if (m == 1) {
    add_literal_gradient(psi.literals.front(), x, 1.0, grad);
    return literal_value(psi.literals.front(), x);
  }
  Scratch s(m);
  double lo = fill_values(psi, x, s.data);
  double rest = shifted_weights(s.data, m, lo, cfg.eta);
  for (std::size_t i = 0; i < m; ++i) {
    add_literal_gradient(psi.literals[i], x, s.data[i] / (1.0 + rest), grad);
  }
  return lo - std::log1p(rest) / cfg.eta;
}

ValueGrad smooth_value_and_grad(const Conjunction& psi, const Vector& x,
                                const SmoothingConfig& cfg) {
  ValueGrad out;
  out.value = smooth_robustness(psi, x, cfg, out.grad);
  return out;
}

std::vector<double> softmin_weights(const Conjunction& psi, const Vector& x,
                                    const SmoothingConfig& cfg) {
  std::vector<double> w(psi.literals.size());
  if (w.empty()) return w;
  double lo = fill_values(psi, x, w.data());
  double sum = 1.0 + shifted_weights(w.data(), w.size(), lo, cfg.eta);
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace etstl
