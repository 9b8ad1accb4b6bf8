#include <doctest.h>

#include "imvar/optimize.hpp"

#include <cmath>

using namespace imvar;
using namespace imvar::optim;

namespace {

// Concave quadratic with maximum at (1, -2).
double quad(const Vector& x) { return -(x(0) - 1) * (x(0) - 1) - 3 * (x(1) + 2) * (x(1) + 2) + 0.5 * (x(0) - 1) * (x(1) + 2); }

}  // namespace

TEST_CASE("newton finds the maximum of a concave quadratic") {
  auto grad = [](const Vector& x) { return fd_gradient(quad, x); };
  auto hess = [](const Vector& x) { return fd_hessian(quad, x); };
  const Result r = newton_maximize(quad, grad, hess, Vector::Zero(2));
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x(1) == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("nelder-mead on Rosenbrock") {
  auto f = [](const Vector& x) { return -(100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2)); };
  NelderMeadOptions opt;
  opt.max_evaluations = 10000;
  opt.tolerance = 1e-14;
  const Result r = nelder_mead_maximize(f, Vector{{-1.2, 1.0}}, opt);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("golden section") {
  const Result r = golden_section_maximize([](double x) { return -std::cos(x); }, 2.0, 4.0);
  CHECK(r.x(0) == doctest::Approx(M_PI).epsilon(1e-7));
}

TEST_CASE("finite differences") {
  auto f = [](const Vector& x) { return std::sin(x(0)) * std::exp(x(1)); };
  const Vector x{{0.3, -0.2}};
  const Vector g = fd_gradient(f, x);
  CHECK(g(0) == doctest::Approx(std::cos(0.3) * std::exp(-0.2)).epsilon(1e-7));
  CHECK(g(1) == doctest::Approx(std::sin(0.3) * std::exp(-0.2)).epsilon(1e-7));
  const Matrix h = fd_hessian(f, x);
  CHECK(h(0, 1) == doctest::Approx(std::cos(0.3) * std::exp(-0.2)).epsilon(1e-5));
  CHECK(h(0, 0) == doctest::Approx(-std::sin(0.3) * std::exp(-0.2)).epsilon(1e-5));
  const Matrix j = fd_jacobian([&](const Vector& y) { return fd_gradient(f, y); }, x);
  CHECK(j(1, 1) == doctest::Approx(std::sin(0.3) * std::exp(-0.2)).epsilon(1e-4));
}
