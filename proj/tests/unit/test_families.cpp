#include <doctest.h>

#include "imvar/families.hpp"
#include "imvar/stats.hpp"

#include <cmath>

using namespace imvar;

namespace {

const Matrix kInfo = (Matrix(2, 2) << 4.0, 1.0, 1.0, 2.0).finished();
const Vector kMean{{0.5, -1.0}};

}  // namespace

TEST_CASE("eigen pairs are ordered and signed") {
  const EigenPairs e = symmetric_eigen(kInfo);
  CHECK(e.values(0) > e.values(1));
  for (Index s = 0; s < 2; ++s) CHECK(e.vectors(0, s) > 0);
  const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  CHECK((back - kInfo).norm() < 1e-12);
  const EigenPairs diag = symmetric_eigen(Vector{{4.0, 1.0}}.asDiagonal());
  CHECK(diag.vectors(0, 0) == 1.0);
  CHECK(diag.values(0) == 4.0);
  CHECK_THROWS_AS(symmetric_eigen(Vector{{1.0, -1.0}}.asDiagonal()), Error);
}

TEST_CASE("scalar and vector families agree at constant xi") {
  Rng rng = make_rng(3);
  std::normal_distribution<double> norm;
  for (double c : {0.7, 1.0, 1.9}) {
    const GaussianScalarFamily s(kMean, kInfo, c);
    const GaussianVectorFamily v(kMean, kInfo, Vector::Constant(2, c));
    for (int i = 0; i < 100; ++i) {
      const Vector theta = kMean + Vector{{norm(rng), norm(rng)}};
      const double a = s.contour(theta), b = v.contour(theta);
      CHECK(std::abs(a - b) <= 1e-10 * std::max(a, 1e-300));
    }
  }
}

TEST_CASE("boundary points sit on the credible ellipsoid") {
  const GaussianVectorFamily v(kMean, kInfo, Vector{{1.3, 0.6}});
  const double q = stats::chisq_quantile(0.9, 2);
  const auto pts = v.boundary_points(0.1);
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) {
    CHECK(v.quadratic_form(p) == doctest::Approx(q).epsilon(1e-10));
    CHECK(v.contour(p) == doctest::Approx(0.1).epsilon(1e-10));
  }
  CHECK((pts[0] + pts[1] - 2 * kMean).norm() < 1e-12);
}

TEST_CASE("contour is decreasing in the quadratic form") {
  const GaussianScalarFamily s(kMean, kInfo);
  double last = 2.0;
  for (double r = 0.0; r < 3.0; r += 0.25) {
    const double v = s.contour(kMean + Vector{{r, 0.0}});
    CHECK(v < last);
    last = v;
  }
  CHECK(s.contour(kMean) == 1.0);
  const PossibilityContour pc = s.to_contour();
  CHECK(pc.gaussian.has_value());
  CHECK(pc(kMean + Vector{{0.3, 0.2}}) == doctest::Approx(s.contour(kMean + Vector{{0.3, 0.2}})));
}

TEST_CASE("credible coverage of sampled draws") {
  const GaussianVectorFamily v(kMean, kInfo, Vector{{1.2, 0.8}});
  Rng rng = make_rng(17);
  const auto draws = v.sample(100000, rng);
  int inside = 0;
  for (const auto& d : draws) inside += v.in_credible_ellipsoid(0.1, d);
  const double frac = inside / 100000.0;
  CHECK(frac >= 0.897);
  CHECK(frac <= 0.903);
}

TEST_CASE("scalar sample covariance") {
  const GaussianScalarFamily s(kMean, kInfo, 1.5);
  Rng rng = make_rng(8);
  const auto draws = s.sample(50000, rng);
  Matrix cov = Matrix::Zero(2, 2);
  for (const auto& d : draws) cov += (d - kMean) * (d - kMean).transpose();
  cov /= 50000.0;
  CHECK((cov - s.covariance()).cwiseAbs().maxCoeff() < 0.03);
  CHECK((s.covariance() - 2.25 * kInfo.inverse()).norm() < 1e-12);
}

TEST_CASE("invalid xi is rejected on use") {
  Rng rng = make_rng(5);
  CHECK_THROWS_AS(GaussianScalarFamily(kMean, kInfo, 0.0).contour(kMean), Error);
  CHECK_THROWS_AS(GaussianVectorFamily(kMean, kInfo, Vector{{1.0, -1.0}}).sample(4, rng), Error);
  CHECK_THROWS_AS(DirichletFamily(Vector{{0.5, 0.5}}, 10, -1.0).sample(4, rng), Error);
}

TEST_CASE("dirichlet family") {
  const DirichletFamily f(Vector{{0.2, 0.3, 0.5}}, 20.0, 1.0);
  CHECK(f.parameters()(2) == doctest::Approx(10.0));
  CHECK(std::isinf(f.log_density(Vector{{0.5, 0.6, -0.1}})));
  Rng rng = make_rng(4);
  const auto draws = f.sample(20000, rng);
  Vector m = Vector::Zero(3);
  for (const auto& d : draws) {
    CHECK(d.sum() == doctest::Approx(1.0));
    m += d;
  }
  m /= 20000.0;
  CHECK(m(2) == doctest::Approx(0.5).epsilon(0.02));
  // Density mode is near the mean, far points have small possibility.
  CHECK(f.contour(Vector{{0.2, 0.3, 0.5}}, 2000, rng) > 0.9);
  CHECK(f.contour(Vector{{0.8, 0.1, 0.1}}, 2000, rng) < 0.01);
  CHECK(f.contour(Vector{{0.5, 0.6, -0.1}}, 100, rng) == 0.0);
}
