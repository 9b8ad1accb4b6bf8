#include <doctest.h>

#include "imvar/families.hpp"
#include "imvar/inference.hpp"
#include "imvar/stats.hpp"

#include <cmath>
#include <limits>

using namespace imvar;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GaussianVectorFamily family2() {
  return GaussianVectorFamily(Vector{{0.0, 0.0}}, (Matrix(2, 2) << 2.0, 0.4, 0.4, 1.0).finished());
}

// Same contour without the closed form, so every query goes through search.
PossibilityContour opaque(const GaussianVectorFamily& f) {
  PossibilityContour pc(ContourKind::monte_carlo, f.dimension(),
                        [f](const Vector& t, std::uint64_t) { return f.contour(t); });
  pc.anchor = Anchor{f.mean(), f.covariance()};
  return pc;
}

}  // namespace

TEST_CASE("closed-form upper probability of a one-sided set") {
  const PossibilityContour pc = GaussianScalarFamily(Vector::Zero(1), Matrix::Identity(1, 1)).to_contour();
  const UpperProbability up = upper_probability(pc, Hypothesis::box(Vector::Constant(1, 1.0), Vector::Constant(1, kInf)));
  CHECK(up.exact);
  CHECK(up.value == doctest::Approx(stats::chisq_sf(1.0, 1)).epsilon(1e-10));
  const UpperProbability hs = upper_probability(pc, Hypothesis::half_space(Vector::Constant(1, 1.0), 1.0));
  CHECK(hs.value == doctest::Approx(up.value).epsilon(1e-10));
  CHECK(upper_probability(pc, Hypothesis::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0))).value == 1.0);
}

TEST_CASE("search agrees with the closed form") {
  const auto f = family2();
  const PossibilityContour exact = f.to_contour(), search = opaque(f);
  const std::vector<Hypothesis> hs{
      Hypothesis::box(Vector{{1.0, -kInf}}, Vector{{kInf, kInf}}),
      Hypothesis::box(Vector{{0.5, 0.5}}, Vector{{2.0, 3.0}}),
      Hypothesis::half_space(Vector{{1.0, -1.0}}, 1.2),
  };
  for (const auto& h : hs) {
    const UpperProbability a = upper_probability(exact, h), b = upper_probability(search, h);
    CHECK(a.exact);
    CHECK_FALSE(b.exact);
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-3));
    CHECK(b.value <= a.value + 1e-9);
  }
}

TEST_CASE("maxitivity, monotonicity and conjugacy") {
  const auto f = family2();
  const PossibilityContour pc = opaque(f);
  const Hypothesis a = Hypothesis::box(Vector{{1.0, -kInf}}, Vector{{kInf, kInf}});
  const Hypothesis b = Hypothesis::half_space(Vector{{0.0, -1.0}}, 0.8);
  const double pa = upper_probability(pc, a).value, pb = upper_probability(pc, b).value;
  CHECK(upper_probability(pc, Hypothesis::union_of(2, {a, b})).value == doctest::Approx(std::max(pa, pb)).epsilon(1e-3));
  const Hypothesis inner = Hypothesis::box(Vector{{1.5, -1.0}}, Vector{{3.0, 1.0}});
  CHECK(upper_probability(pc, inner).value <= pa + 1e-9);
  for (const auto& h : {a, b, inner}) {
    const double low = lower_probability(pc, h);
    CHECK(low == doctest::Approx(1.0 - upper_probability(pc, h.complement()).value));
    CHECK(low <= upper_probability(pc, h).value + 1e-9);
    CHECK(low >= 0.0);
  }
  CHECK(upper_probability(pc, Hypothesis::whole(2)).value == 1.0);
  CHECK(lower_probability(pc, Hypothesis::whole(2)) == 1.0);
}

TEST_CASE("finite sets and predicates") {
  const auto f = family2();
  const PossibilityContour pc = f.to_contour();
  const std::vector<Vector> pts{Vector{{1.0, 1.0}}, Vector{{-0.2, 0.1}}};
  const UpperProbability up = upper_probability(pc, Hypothesis::finite_set(pts));
  CHECK(up.exact);
  CHECK(up.value == doctest::Approx(f.contour(pts[1])));
  const Hypothesis p = Hypothesis::predicate(2, [](const Vector& t) { return t.norm() > 1.0; });
  CHECK_FALSE(p.has_complement());
  try {
    p.complement();
    FAIL("expected no-complement");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_complement);
  }
  const Hypothesis box = Hypothesis::box(Vector{{0.0, 0.0}}, Vector{{1.0, 1.0}});
  CHECK(box.complement().contains(Vector{{2.0, 0.5}}));
  CHECK_FALSE(box.complement().contains(Vector{{0.5, 0.5}}));
}

TEST_CASE("marginal of a Gaussian under a linear feature") {
  const auto f = family2();
  const Feature g = Feature::linear((Matrix(1, 2) << 1.0, 1.0).finished());
  const ContourGrid grid = marginal_contour(f.to_contour(), g, {{-2.0, 2.0, 41}});
  const Matrix a = g.matrix.value();
  const double var = (a * f.covariance() * a.transpose())(0, 0);
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double phi = grid.node(i)(0);
    CHECK(grid.values[i] == doctest::Approx(stats::chisq_sf(phi * phi / var, 1)).epsilon(1e-10));
    best = std::max(best, grid.values[i]);
  }
  CHECK(best == doctest::Approx(1.0));
  // Without the closed form the search returns the sup over the fiber of the
  // two-dimensional contour, so the reference uses two degrees of freedom.
  const ContourGrid searched = marginal_contour(opaque(f), g, {{-2.0, 2.0, 9}});
  for (std::size_t i = 0; i < searched.size(); ++i)
    CHECK(searched.values[i] == doctest::Approx(stats::chisq_sf(std::pow(searched.node(i)(0), 2) / var, 2)).epsilon(2e-3));
}

TEST_CASE("nonlinear feature marginal peaks at g(theta hat)") {
  const auto f = family2();
  const Feature g = Feature::nonlinear(1, [](const Vector& t) { return Vector::Constant(1, t(0) * t(0) + t(1)); });
  const ContourGrid grid = marginal_contour(opaque(f), g, {{-1.0, 1.0, 5}});
  CHECK(grid.values[2] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(grid.values[0] < grid.values[2]);
}

TEST_CASE("choquet identities") {
  const PossibilityContour pc = GaussianScalarFamily(Vector::Zero(1), Matrix::Identity(1, 1)).to_contour();
  ChoquetSpec constant;
  constant.loss = [](const Vector&) { return 2.5; };
  CHECK(choquet_upper_expectation(pc, constant).value == doctest::Approx(2.5).epsilon(1e-6));

  const Hypothesis h = Hypothesis::box(Vector::Constant(1, 1.0), Vector::Constant(1, kInf));
  ChoquetSpec ind;
  ind.indicator = h;
  CHECK(std::abs(choquet_upper_expectation(pc, ind).value - upper_probability(pc, h).value) <= 1.0 / ind.levels);

  // sqrt(2 / pi) for the identity loss.
  ChoquetSpec lin;
  lin.loss = [](const Vector& t) { return t(0); };
  const double v = choquet_upper_expectation(pc, lin).value;
  CHECK(v == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(5e-3));

  ChoquetSpec bigger;
  bigger.loss = [](const Vector& t) { return t(0) + std::abs(t(0)) * 0.1; };
  CHECK(choquet_upper_expectation(pc, bigger).value >= v);

  ChoquetSpec wild;
  wild.loss = [](const Vector& t) { return std::exp(std::exp(t(0) * 10)); };
  try {
    choquet_upper_expectation(pc, wild);
    FAIL("expected unbounded-loss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unbounded_loss);
  }
}
