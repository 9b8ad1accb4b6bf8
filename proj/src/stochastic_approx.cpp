#include "imvar/stochastic_approx.hpp"
#include "imvar/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

namespace imvar {

namespace {

// Separates draw streams from contour-evaluation streams.
constexpr std::uint64_t kDrawTag = 0xd1a3ULL;

void log_iteration(int t, const Vector& xi, const Vector& objective) {
  std::fprintf(stderr, "sa t=%d xi=", t);
  for (Index i = 0; i < xi.size(); ++i) std::fprintf(stderr, "%s%.6g", i ? "," : "", xi(i));
  std::fprintf(stderr, " objective=");
  for (Index i = 0; i < objective.size(); ++i) std::fprintf(stderr, "%s%.6g", i ? "," : "", objective(i));
  std::fprintf(stderr, "\n");
}

}  // namespace

void SAConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::config, "alpha must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::config, "epsilon must be positive");
  if (K < 1 || M < 1) throw Error(ErrorCode::config, "K and M must be at least 1");
  if (min_iterations < 0 || max_iterations < 1 || min_iterations > max_iterations)
    throw Error(ErrorCode::config, "need 0 <= min_iterations <= max_iterations, max_iterations >= 1");
  if (!(step.scale > 0.0) || !(step.offset > -1.0)) throw Error(ErrorCode::config, "invalid step schedule");
}

std::string_view to_string(Termination reason) {
  return reason == Termination::converged ? "converged" : "max-iterations";
}

FitTrace robbins_monro(const SAObjective& objective, const SAConfig& config, double sign, Vector xi0) {
  config.validate();
  FitTrace trace;
  Vector xi = xi0.cwiseMax(kMinXi);
  for (int t = 0; t < config.max_iterations; ++t) {
    const Vector value = objective(xi, t);
    if (value.size() != xi.size()) throw Error(ErrorCode::numerical, "objective dimension does not match xi");
    trace.entries.push_back({t, xi, value});
    if (config.log_progress) log_iteration(t, xi, value);
    const Vector next = (xi + sign * config.step(t + 1) * value).cwiseMax(kMinXi);
    const double change = (next - xi).cwiseAbs().maxCoeff();
    xi = next;
    if (t + 1 >= config.min_iterations && change < config.epsilon) {
      trace.reason = Termination::converged;
      break;
    }
  }
  trace.xi_hat = xi;
  return trace;
}

double f_hat(const std::vector<Vector>& draws, const PossibilityContour& contour, double alpha, std::uint64_t seed,
             int t, unsigned workers, long* failures) {
  if (draws.empty()) throw Error(ErrorCode::config, "f_hat needs at least one draw");
  std::vector<std::uint8_t> inside(draws.size(), 0);
  std::atomic<long> failed{0};
  parallel_for(draws.size(), workers, [&](std::size_t k) {
    try {
      inside[k] = contour(draws[k], stream_seed(seed, {static_cast<std::uint64_t>(t), k})) > alpha ? 1 : 0;
    } catch (const std::exception&) {
      ++failed;
    }
  });
  if (failures) *failures += failed.load();
  long count = 0;
  for (auto v : inside) count += v;
  return static_cast<double>(count) / static_cast<double>(draws.size()) - (1.0 - alpha);
}

ScalarFit fit_scalar(const GaussianScalarFamily& start, const PossibilityContour& contour, const SAConfig& config) {
  config.validate();
  long failures = 0;
  long evaluations = 0;
  auto objective = [&](const Vector& xi, int t) {
    Rng rng = make_rng(stream_seed(config.seed, {kDrawTag, static_cast<std::uint64_t>(t)}));
    const auto draws = start.with_xi(xi(0)).sample(config.K, rng);
    evaluations += static_cast<long>(draws.size());
    return Vector::Constant(1, f_hat(draws, contour, config.alpha, config.seed, t, config.workers, &failures));
  };
  FitTrace trace = robbins_monro(objective, config, +1.0, Vector::Constant(1, start.xi()));
  trace.evaluations = evaluations;
  trace.failures = failures;
  return {start.with_xi(trace.xi_hat(0)), std::move(trace)};
}

ScalarFit fit_scalar(const Model& model, const Dataset& data, const PossibilityContour& contour, const SAConfig& config) {
  const MleInformation mi = mle_and_information(model, data);
  return fit_scalar(GaussianScalarFamily(mi.theta, mi.information, 1.0), contour, config);
}

VectorFit fit_vector(const GaussianVectorFamily& start, const PossibilityContour& contour, const SAConfig& config) {
  config.validate();
  long failures = 0;
  long evaluations = 0;
  auto objective = [&](const Vector& xi, int t) {
    const auto points = start.with_xi(xi).boundary_points(config.alpha);
    std::vector<double> values(points.size(), 0.0);
    std::atomic<long> failed{0};
    parallel_for(points.size(), config.workers, [&](std::size_t j) {
      try {
        values[j] = contour(points[j], stream_seed(config.seed, {static_cast<std::uint64_t>(t), j}));
      } catch (const std::exception&) {
        ++failed;  // counts as possibility 0
      }
    });
    failures += failed.load();
    evaluations += static_cast<long>(points.size());
    Vector g(xi.size());
    for (Index s = 0; s < xi.size(); ++s)
      g(s) = std::max(values[static_cast<std::size_t>(2 * s)], values[static_cast<std::size_t>(2 * s + 1)]) - config.alpha;
    return g;
  };
  FitTrace trace = robbins_monro(objective, config, +1.0, start.xi());
  trace.evaluations = evaluations;
  trace.failures = failures;
  return {start.with_xi(trace.xi_hat), std::move(trace)};
}

VectorFit fit_vector(const Model& model, const Dataset& data, const PossibilityContour& contour, const SAConfig& config) {
  const MleInformation mi = mle_and_information(model, data);
  return fit_vector(GaussianVectorFamily(mi.theta, mi.information), contour, config);
}

DirichletFit fit_dirichlet(const DirichletFamily& start, const PossibilityContour& contour, const SAConfig& config) {
  config.validate();
  long failures = 0;
  long evaluations = 0;
  auto objective = [&](const Vector& xi, int t) {
    Rng rng = make_rng(stream_seed(config.seed, {kDrawTag, static_cast<std::uint64_t>(t)}));
    const auto draws = start.with_xi(xi(0)).sample(config.K, rng);
    evaluations += static_cast<long>(draws.size());
    return Vector::Constant(1, f_hat(draws, contour, config.alpha, config.seed, t, config.workers, &failures));
  };
  FitTrace trace = robbins_monro(objective, config, +1.0, Vector::Constant(1, start.xi()));
  trace.evaluations = evaluations;
  trace.failures = failures;
  return {start.with_xi(trace.xi_hat(0)), std::move(trace)};
}

}  // namespace imvar
