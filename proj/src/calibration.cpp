#include "imvar/calibration.hpp"
#include "imvar/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace imvar {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> column(const Dataset& data) {
  std::vector<double> x(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i) x[static_cast<std::size_t>(i)] = data.y(i);
  return x;
}

SAConfig with_seed(SAConfig sa, std::uint64_t seed) {
  sa.seed = seed;
  return sa;
}

BuiltContour built(PossibilityContour contour) {
  return BuiltContour{std::move(contour), {}, 0, std::nullopt, std::nullopt, std::nullopt, {}};
}

BuiltContour built(const ScalarFit& fit) {
  return BuiltContour{fit.family.to_contour(), Vector::Constant(1, fit.family.xi()), fit.trace.iterations(),
                      fit.family, std::nullopt, std::nullopt, fit.trace};
}

BuiltContour built(const VectorFit& fit) {
  return BuiltContour{fit.family.to_contour(), fit.family.xi(), fit.trace.iterations(),
                      std::nullopt, fit.family, std::nullopt, fit.trace};
}

BuiltContour built(const DirichletFit& fit, int M, std::uint64_t seed) {
  return BuiltContour{fit.family.to_contour(M, seed), Vector::Constant(1, fit.family.xi()), fit.trace.iterations(),
                      std::nullopt, std::nullopt, fit.family, fit.trace};
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::exact: return "exact";
    case Method::naive: return "naive";
    case Method::variational_scalar: return "variational-scalar";
    case Method::variational_vector: return "variational-vector";
    case Method::variational_dirichlet: return "variational-dirichlet";
    case Method::bootstrap: return "bootstrap";
    case Method::bootstrap_variational: return "bootstrap-variational";
    case Method::censored: return "censored";
    case Method::censored_variational: return "censored-variational";
    case Method::profile: return "profile";
    case Method::profile_variational: return "profile-variational";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::exact, Method::naive, Method::variational_scalar, Method::variational_vector,
                   Method::variational_dirichlet, Method::bootstrap, Method::bootstrap_variational, Method::censored, Method::censored_variational,
                   Method::profile, Method::profile_variational})
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::config, "unknown method '" + std::string(name) + "'");
}

DataGenerator model_generator(ModelPtr model, Vector truth, Index n) {
  if (!model->in_domain(truth)) throw Error(ErrorCode::config, "scenario truth is outside the model domain");
  return [model, truth, n](Rng& rng) { return model->simulate(truth, n, rng); };
}

ContourBuilder exact_binomial_builder() {
  return [](const Dataset& data, std::uint64_t) {
    const auto s = static_cast<Index>(std::llround(data.response.col(0).sum()));
    return built(make_exact_binomial_contour(data.size(), s));
  };
}

ContourBuilder naive_builder(ModelPtr model, int M) {
  return [model, M](const Dataset& data, std::uint64_t seed) {
    return built(make_mc_contour(model, data, M, seed));
  };
}

ContourBuilder variational_builder(ModelPtr model, int M, SAConfig sa, bool vector) {
  sa.M = M;
  return [model, M, sa, vector](const Dataset& data, std::uint64_t seed) {
    const PossibilityContour target = make_mc_contour(model, data, M, seed);
    const SAConfig config = with_seed(sa, seed);
    if (vector) {
      return built(fit_vector(*model, data, target, config));
    }
    return built(fit_scalar(*model, data, target, config));
  };
}

ContourBuilder dirichlet_builder(Index categories, int M, SAConfig sa) {
  sa.M = M;
  auto model = std::make_shared<Multinomial>(categories);
  return [model, M, sa](const Dataset& data, std::uint64_t seed) {
    const PossibilityContour target = make_mc_contour(model, data, M, seed);
    const Vector counts = model->counts(data);
    const DirichletFamily start(counts / counts.sum(), counts.sum(), 1.0);
    const DirichletFit fit = fit_dirichlet(start, target, with_seed(sa, seed));
    return built(fit, M, seed);
  };
}

ContourBuilder bootstrap_builder(RiskSpec risk) {
  return [risk](const Dataset& data, std::uint64_t seed) {
    return built(make_bootstrap_contour(column(data), risk, seed));
  };
}

ContourBuilder bootstrap_variational_builder(RiskSpec risk, double tau, SAConfig sa) {
  return [risk, tau, sa](const Dataset& data, std::uint64_t seed) {
    const auto x = column(data);
    const PossibilityContour target = make_bootstrap_contour(x, risk, seed);
    const ScalarFit fit = fit_scalar(quantile_companion(x, tau), target, with_seed(sa, seed));
    return built(fit);
  };
}

ContourBuilder censored_builder(LogNormalParametrization parametrization, int M) {
  return [parametrization, M](const Dataset& data, std::uint64_t seed) {
    return built(make_censored_contour(parametrization, data, M, seed));
  };
}

ContourBuilder censored_variational_builder(LogNormalParametrization parametrization, int M, SAConfig sa) {
  sa.M = M;
  return [parametrization, M, sa](const Dataset& data, std::uint64_t seed) {
    const LeftCensoredLogNormal model(parametrization, kaplan_meier_swapped(data));
    const PossibilityContour target = make_censored_contour(parametrization, data, M, seed);
    const VectorFit fit = fit_vector(model, data, target, with_seed(sa, seed));
    return built(fit);
  };
}

ContourBuilder profile_builder(ProfileSpec spec, int M) {
  return [spec, M](const Dataset& data, std::uint64_t seed) {
    return built(make_profile_contour(spec, data, M, seed));
  };
}

ContourBuilder profile_variational_builder(ProfileSpec spec, int M, SAConfig sa) {
  sa.M = M;
  return [spec, M, sa](const Dataset& data, std::uint64_t seed) {
    const PossibilityContour target = make_profile_contour(spec, data, M, seed);
    const ScalarFit fit = fit_scalar(profile_companion(spec, data), target, with_seed(sa, seed));
    return built(fit);
  };
}

double CalibrationReport::cdf_at(double alpha) const {
  if (values.empty()) return 0.0;
  const auto it = std::upper_bound(values.begin(), values.end(), alpha);
  return static_cast<double>(it - values.begin()) / static_cast<double>(values.size());
}

namespace {

void check_scenario(const Scenario& s) {
  if (s.replications < 1) throw Error(ErrorCode::config, "scenario needs at least one replication");
  if (!s.generator || !s.builder) throw Error(ErrorCode::config, "scenario needs a data generator and a contour builder");
  for (double a : s.alpha_levels)
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::config, "alpha levels must lie in (0, 1)");
}

void check_failures(int failures, int replications, const std::string& name) {
  if (failures * 20 > replications)
    throw Error(ErrorCode::numerical, "study '" + name + "': " + std::to_string(failures) + " of " +
                                          std::to_string(replications) + " replications failed");
}

}  // namespace

CalibrationReport validity_study(const Scenario& scenario) {
  check_scenario(scenario);
  const auto R = static_cast<std::size_t>(scenario.replications);
  std::vector<double> values(R, 0.0), timings(R, 0.0);
  std::vector<Vector> xi(R);
  std::vector<std::uint8_t> failed(R, 0);
  parallel_for(R, scenario.workers, [&](std::size_t r) {
    try {
      Rng data_rng = make_rng(stream_seed(scenario.seed, {r, 0}));
      const Dataset data = scenario.generator(data_rng);
      const auto start = Clock::now();
      const BuiltContour built = scenario.builder(data, stream_seed(scenario.seed, {r, 1}));
      values[r] = built.contour(scenario.truth, stream_seed(scenario.seed, {r, 2}));
      timings[r] = seconds_since(start);
      xi[r] = built.xi;
    } catch (const Error&) {
      failed[r] = 1;
    }
  });
  CalibrationReport report;
  report.name = scenario.name;
  report.replications = scenario.replications;
  for (std::size_t r = 0; r < R; ++r) {
    if (failed[r]) {
      ++report.failures;
      continue;
    }
    report.values.push_back(values[r]);
    report.timings.push_back(timings[r]);
    if (xi[r].size() > 0) report.xi.push_back(xi[r]);
  }
  check_failures(report.failures, scenario.replications, scenario.name);
  std::sort(report.values.begin(), report.values.end());
  report.alpha_levels = scenario.alpha_levels;
  std::sort(report.alpha_levels.begin(), report.alpha_levels.end());
  for (double a : report.alpha_levels) report.cdf.push_back(report.cdf_at(a));
  return report;
}

HypothesisReport hypothesis_calibration(const Scenario& scenario, const std::vector<Hypothesis>& hypotheses,
                                        const SearchBudget& budget) {
  check_scenario(scenario);
  for (const auto& h : hypotheses)
    if (!h.contains(scenario.truth)) throw Error(ErrorCode::config, "hypothesis is false at the scenario truth");
  const auto R = static_cast<std::size_t>(scenario.replications);
  std::vector<std::vector<double>> upper(hypotheses.size(), std::vector<double>(R, 0.0));
  std::vector<std::uint8_t> failed(R, 0);
  parallel_for(R, scenario.workers, [&](std::size_t r) {
    try {
      Rng data_rng = make_rng(stream_seed(scenario.seed, {r, 0}));
      const Dataset data = scenario.generator(data_rng);
      const BuiltContour built = scenario.builder(data, stream_seed(scenario.seed, {r, 1}));
      SearchBudget inner = budget;
      inner.seed = stream_seed(scenario.seed, {r, 2});
      inner.workers = 1;
      for (std::size_t k = 0; k < hypotheses.size(); ++k)
        upper[k][r] = upper_probability(built.contour, hypotheses[k], inner).value;
    } catch (const Error&) {
      failed[r] = 1;
    }
  });
  HypothesisReport report;
  report.alpha_levels = scenario.alpha_levels;
  std::sort(report.alpha_levels.begin(), report.alpha_levels.end());
  for (auto f : failed) report.failures += f;
  check_failures(report.failures, scenario.replications, scenario.name);
  for (const auto& per_h : upper) {
    HypothesisCurve curve;
    for (std::size_t r = 0; r < R; ++r)
      if (!failed[r]) curve.upper.push_back(per_h[r]);
    std::sort(curve.upper.begin(), curve.upper.end());
    for (double a : report.alpha_levels) {
      const auto it = std::upper_bound(curve.upper.begin(), curve.upper.end(), a);
      curve.cdf.push_back(curve.upper.empty() ? 0.0
                                              : static_cast<double>(it - curve.upper.begin()) / curve.upper.size());
    }
    report.curves.push_back(std::move(curve));
  }
  return report;
}

TimingReport timing_accuracy_study(const DataGenerator& generator, const ContourBuilder& reference,
                                   const ContourBuilder& approximation, const std::vector<AxisSpec>& axes,
                                   int replications, std::uint64_t seed, unsigned workers) {
  if (replications < 1) throw Error(ErrorCode::config, "timing study needs at least one replication");
  TimingReport report;
  double ref_total = 0.0, approx_total = 0.0;
  for (int r = 0; r < replications; ++r) {
    const auto ur = static_cast<std::uint64_t>(r);
    Rng data_rng = make_rng(stream_seed(seed, {ur, 0}));
    const Dataset data = generator(data_rng);
    const std::uint64_t build_seed = stream_seed(seed, {ur, 1});
    const std::uint64_t grid_seed = stream_seed(seed, {ur, 2});

    auto start = Clock::now();
    const BuiltContour ref = reference(data, build_seed);
    const ContourGrid ref_grid = grid_eval(ref.contour, axes, workers, grid_seed);
    const double ref_time = seconds_since(start);

    start = Clock::now();
    const BuiltContour approx = approximation(data, build_seed);
    const ContourGrid approx_grid = grid_eval(approx.contour, axes, workers, grid_seed);
    const double approx_time = seconds_since(start);

    report.reference_seconds.push_back(ref_time);
    report.approximation_seconds.push_back(approx_time);
    report.l1.push_back(l1_distance(approx_grid, ref_grid));
    ref_total += ref_time;
    approx_total += approx_time;
  }
  report.relative_time = approx_total > 0.0 ? ref_total / approx_total : 0.0;
  double sum = 0.0;
  for (double v : report.l1) sum += v;
  report.mean_l1 = sum / static_cast<double>(report.l1.size());
  return report;
}

Matrix scaled_poisson_design(Index n, Index p, std::uint64_t seed) {
  if (n < 2 || p < 0) throw Error(ErrorCode::config, "design needs n >= 2 and p >= 0");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> norm;
  Matrix x(n, p + 1);
  x.col(0).setOnes();
  for (Index j = 1; j <= p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = norm(rng);
    x.col(j).array() -= x.col(j).mean();
    x.col(j) *= std::sqrt(static_cast<double>(n) / x.col(j).squaredNorm());
  }
  return x;
}

double validity_bound(double alpha, int replications) {
  return alpha + 2.0 * std::sqrt(alpha * (1.0 - alpha) / replications);
}

}  // namespace imvar
