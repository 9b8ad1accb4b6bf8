#include "imvar/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace imvar::optim {

namespace {

double scaled_gradient_norm(const Vector& g, const Vector& x) {
  return (g.array().abs() * (1.0 + x.array().abs())).maxCoeff();
}

}  // namespace

Result newton_maximize(const Objective& f, const Gradient& grad, const Hessian& hess, Vector x0,
                       const NewtonOptions& options) {
  Result r;
  r.x = std::move(x0);
  r.value = f(r.x);
  if (!std::isfinite(r.value)) return r;
  for (int it = 0; it < options.max_iterations; ++it) {
    r.iterations = it + 1;
    const Vector g = grad(r.x);
    if (!g.allFinite()) return r;
    if (scaled_gradient_norm(g, r.x) < options.gradient_tolerance * (1.0 + std::abs(r.value))) {
      r.converged = true;
      return r;
    }
    const Matrix neg_h = -hess(r.x);
    Vector direction;
    Eigen::LLT<Matrix> llt(neg_h);
    if (neg_h.allFinite() && llt.info() == Eigen::Success) {
      direction = llt.solve(g);
    } else {
      // Shift the spectrum until the system is positive definite.
      const double scale = neg_h.allFinite() ? std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff()) : 1.0;
      double shift = 1e-6 * scale;
      for (;;) {
        Matrix shifted = neg_h.allFinite() ? neg_h : Matrix::Zero(g.size(), g.size());
        shifted.diagonal().array() += shift;
        Eigen::LLT<Matrix> l2(shifted);
        if (l2.info() == Eigen::Success) {
          direction = l2.solve(g);
          break;
        }
        shift *= 10.0;
        if (shift > 1e12 * scale) {
          direction = g;
          break;
        }
      }
    }
    const double slope = g.dot(direction);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const Vector candidate = r.x + t * direction;
      const double value = f(candidate);
      if (std::isfinite(value) && value >= r.value + 1e-4 * t * slope) {
        const double step = (t * direction).cwiseAbs().maxCoeff();
        r.x = candidate;
        const double gain = value - r.value;
        r.value = value;
        accepted = true;
        if (step < options.step_tolerance * (1.0 + r.x.cwiseAbs().maxCoeff()) ||
            gain <= 1e-15 * (1.0 + std::abs(value))) {
          const Vector g2 = grad(r.x);
          r.converged = g2.allFinite() &&
                        scaled_gradient_norm(g2, r.x) < 1e3 * options.gradient_tolerance * (1.0 + std::abs(r.value));
          return r;
        }
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      r.converged = scaled_gradient_norm(g, r.x) < 1e3 * options.gradient_tolerance * (1.0 + std::abs(r.value));
      return r;
    }
  }
  return r;
}

Result nelder_mead_maximize(const Objective& f, Vector x0, const NelderMeadOptions& options) {
  const Index d = x0.size();
  auto value = [&](const Vector& x) {
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  std::vector<Vector> simplex(static_cast<std::size_t>(d + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(d + 1));
  for (Index i = 0; i < d; ++i) {
    const double step = options.initial_steps.size() == d ? options.initial_steps(i)
                                                            : options.initial_step * (1.0 + std::abs(x0(i)));
    simplex[static_cast<std::size_t>(i + 1)](i) += step;
  }
  int evaluations = 0;
  for (std::size_t i = 0; i < simplex.size(); ++i) {
    values[i] = value(simplex[i]);
    ++evaluations;
  }
  std::vector<std::size_t> order(simplex.size());
  Result r;
  while (evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    ++r.iterations;
    if (std::isfinite(values[worst]) && std::abs(values[best] - values[worst]) <= options.tolerance * (1.0 + std::abs(values[best]))) {
      double spread = 0.0;
      for (const auto& v : simplex) spread = std::max(spread, (v - simplex[best]).cwiseAbs().maxCoeff());
      if (spread <= 1e-8 * (1.0 + simplex[best].cwiseAbs().maxCoeff())) {
        r.converged = true;
        break;
      }
    }
    Vector centroid = Vector::Zero(d);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(d);

    const Vector reflected = centroid + (centroid - simplex[worst]);
    const double fr = value(reflected);
    ++evaluations;
    if (fr > values[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = value(expanded);
      ++evaluations;
      if (fe > fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr > values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr > values[worst];
    const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                      : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = value(contracted);
    ++evaluations;
    if (fc > std::max(outside ? fr : values[worst], -std::numeric_limits<double>::max())) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = value(simplex[i]);
      ++evaluations;
    }
  }
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  r.x = simplex[best];
  r.value = values[best];
  return r;
}

Result golden_section_maximize(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  Result r;
  while (std::abs(b - a) > tolerance * (1.0 + std::abs(a) + std::abs(b))) {
    ++r.iterations;
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
    if (r.iterations > 500) break;
  }
  const double x = 0.5 * (a + b);
  r.x = Vector::Constant(1, x);
  r.value = f(x);
  r.converged = true;
  return r;
}

Vector fd_gradient(const Objective& f, const Vector& x, double rel) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = rel * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp(i) = xm(i) = x(i);
  }
  return g;
}

Matrix fd_jacobian(const Gradient& grad, const Vector& x, double rel) {
  const Index d = x.size();
  Matrix jac(d, d);
  Vector xp = x, xm = x;
  for (Index i = 0; i < d; ++i) {
    const double h = rel * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    jac.col(i) = (grad(xp) - grad(xm)) / (2.0 * h);
    xp(i) = xm(i) = x(i);
  }
  return 0.5 * (jac + jac.transpose());
}

Matrix fd_hessian(const Objective& f, const Vector& x, double rel) {
  const Index d = x.size();
  Matrix h(d, d);
  const double f0 = f(x);
  Vector step(d);
  for (Index i = 0; i < d; ++i) step(i) = rel * (1.0 + std::abs(x(i)));
  for (Index i = 0; i < d; ++i) {
    Vector xp = x, xm = x;
    xp(i) += step(i);
    xm(i) -= step(i);
    h(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (step(i) * step(i));
    for (Index j = 0; j < i; ++j) {
      Vector pp = x, pm = x, mp = x, mm = x;
      pp(i) += step(i); pp(j) += step(j);
      pm(i) += step(i); pm(j) -= step(j);
      mp(i) -= step(i); mp(j) += step(j);
      mm(i) -= step(i); mm(j) -= step(j);
      h(i, j) = h(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step(i) * step(j));
    }
  }
  return h;
}

}  // namespace imvar::optim
