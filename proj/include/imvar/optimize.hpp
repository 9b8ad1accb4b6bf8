#pragma once

#include "imvar/core.hpp"

#include <functional>

namespace imvar::optim {

using Objective = std::function<double(const Vector&)>;
using Gradient = std::function<Vector(const Vector&)>;
using Hessian = std::function<Matrix(const Vector&)>;

struct Result {
  Vector x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct NewtonOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-9;  // on max |g_i| * (1 + |x_i|)
  double step_tolerance = 1e-14;
};

/// Damped Newton ascent with backtracking (Armijo) line search. When the
/// Hessian is not negative definite the step falls back to a regularized
/// direction.
Result newton_maximize(const Objective& f, const Gradient& grad, const Hessian& hess, Vector x0,
                       const NewtonOptions& options = {});

struct NelderMeadOptions {
  int max_evaluations = 2000;
  double tolerance = 1e-10;  // spread of simplex values
  double initial_step = 0.1;  // relative, times (1 + |x_i|)
  Vector initial_steps;        // absolute per-coordinate steps; overrides initial_step
};

Result nelder_mead_maximize(const Objective& f, Vector x0, const NelderMeadOptions& options = {});

/// Maximizes a unimodal function on [lo, hi] by golden-section search.
Result golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tolerance = 1e-10);

/// Central differences with step h_i = rel * (1 + |x_i|).
Vector fd_gradient(const Objective& f, const Vector& x, double rel = 6e-6);
Matrix fd_jacobian(const Gradient& g, const Vector& x, double rel = 1e-5);
/// Second differences of f; symmetric.
Matrix fd_hessian(const Objective& f, const Vector& x, double rel = 1e-4);

}  // namespace imvar::optim
