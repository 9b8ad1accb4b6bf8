#include <doctest.h>

#include "imvar/core.hpp"
#include "imvar/parallel.hpp"
#include "imvar/random.hpp"
#include "imvar/stats.hpp"

#include <atomic>
#include <cmath>
#include <vector>

using namespace imvar;

TEST_CASE("domain membership") {
  CHECK(satisfies(Domain::unit_interval, Vector::Constant(1, 0.3)));
  CHECK_FALSE(satisfies(Domain::unit_interval, Vector::Constant(1, 1.3)));
  CHECK(satisfies(Domain::simplex, Vector{{0.2, 0.3, 0.5}}));
  CHECK_FALSE(satisfies(Domain::simplex, Vector{{0.2, 0.3, 0.6}}));
  CHECK_FALSE(satisfies(Domain::positive_orthant, Vector{{1.0, -1.0}}));
  CHECK(satisfies(Domain::unconstrained, Vector{{-5.0, 5.0}}));
}

TEST_CASE("dataset validation") {
  Dataset d = Dataset::from_values({1.0, 2.0, 3.0});
  CHECK(d.size() == 3);
  CHECK_NOTHROW(d.validate());
  d.observed = {1, 0};
  CHECK_THROWS_AS(d.validate(), Error);
  d.observed = {1, 0, 2};
  CHECK_THROWS_AS(d.validate(), Error);
  d.observed = {1, 0, 1};
  d.covariates = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("error carries its code") {
  try {
    throw Error(ErrorCode::singular_information, "x");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_information);
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
}

TEST_CASE("stream seeds are deterministic and distinct") {
  CHECK(stream_seed(7, {1, 2}) == stream_seed(7, {1, 2}));
  CHECK(stream_seed(7, {1, 2}) != stream_seed(7, {2, 1}));
  CHECK(stream_seed(7, {1}) != stream_seed(8, {1}));
  Rng a = make_rng(42), b = make_rng(42);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("chi-square and normal tails against reference values") {
  // scipy.stats.chi2.sf / ppf
  CHECK(stats::chisq_sf(2.0, 1) == doctest::Approx(0.15729920705028105).epsilon(1e-12));
  CHECK(stats::chisq_quantile(0.9, 2) == doctest::Approx(4.605170185988092).epsilon(1e-10));
  CHECK(stats::chisq_quantile(0.9, 1) == doctest::Approx(2.705543454095404).epsilon(1e-10));
  CHECK(stats::chisq_sf(0.0, 3) == 1.0);
  CHECK(stats::chisq_sf(INFINITY, 3) == 0.0);
  CHECK(stats::chisq_sf(1e3, 2) > 0.0);
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::log_normal_cdf(-40.0) == doctest::Approx(-804.6084420137538).epsilon(1e-8));
  CHECK(stats::digamma(1.0) == doctest::Approx(-0.5772156649015329));
  CHECK(stats::trigamma(1.0) == doctest::Approx(M_PI * M_PI / 6.0));
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 5) throw Error(ErrorCode::numerical, "boom");
  }));
  CHECK(default_workers() >= 1);
}
