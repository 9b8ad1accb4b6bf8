#include "imvar/nuisance.hpp"
#include "imvar/optimize.hpp"
#include "imvar/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace imvar {

namespace {

double gamma_shape_scale_loglik(const Dataset& data, double k, double s) {
  static const GammaModel model;
  return model.log_likelihood(data, Vector{{k, s}});
}

}  // namespace

ProfileSpec gamma_mean_profile(int probes) {
  ProfileSpec spec;
  spec.model = std::make_shared<GammaModel>(GammaParametrization::shape_scale);
  spec.interest = [](const Vector& t) { return t(0) * t(1); };
  spec.interest_gradient = [](const Vector& t) { return Vector{{t(1), t(0)}}; };
  spec.constrained_mle = [](const Dataset& data, double phi) {
    // With s = phi / k the shape solves log k - digamma(k) = c.
    double mean = 0.0, mean_log = 0.0;
    for (Index i = 0; i < data.size(); ++i) {
      mean += data.y(i);
      mean_log += std::log(data.y(i));
    }
    mean /= static_cast<double>(data.size());
    mean_log /= static_cast<double>(data.size());
    const double c = std::log(phi) + mean / phi - 1.0 - mean_log;
    MleResult r;
    const double k = GammaModel::solve_shape(c);
    if (!std::isfinite(k) || !(k > 0.0)) {
      r.theta = Vector{{1.0, phi}};
      r.log_likelihood = -std::numeric_limits<double>::infinity();
      r.converged = r.interior = false;
      return r;
    }
    r.theta = Vector{{k, phi / k}};
    r.log_likelihood = gamma_shape_scale_loglik(data, k, phi / k);
    return r;
  };
  spec.fiber_move = [](const Vector& t, double delta) {
    return Vector{{t(0) * std::exp(delta), t(1) * std::exp(-delta)}};
  };
  spec.phi_in_domain = [](double phi) { return phi > 0.0 && std::isfinite(phi); };
  spec.probes = probes;
  return spec;
}

double relative_profile_likelihood(const ProfileSpec& spec, const Dataset& data, double phi) {
  if (!spec.phi_in_domain(phi)) return 0.0;
  const MleResult full = spec.model->maximize(data);
  if (!full.converged || !std::isfinite(full.log_likelihood))
    throw Error(ErrorCode::non_convergence, "profile: unconstrained maximization failed");
  const MleResult fiber = spec.constrained_mle(data, phi);
  if (!fiber.converged)
    throw Error(ErrorCode::non_convergence, "profile: constrained maximization failed at phi = " + std::to_string(phi));
  return std::min(1.0, std::exp(fiber.log_likelihood - full.log_likelihood));
}

namespace {

double log_profile_ratio(const ProfileSpec& spec, const Dataset& data, double phi, bool* ok) {
  const MleResult full = spec.model->maximize(data);
  const MleResult fiber = spec.constrained_mle(data, phi);
  *ok = full.converged && fiber.converged && std::isfinite(full.log_likelihood);
  return std::min(0.0, fiber.log_likelihood - full.log_likelihood);
}

/// Standard deviation along the fiber chart from the curvature of the
/// log-likelihood at the constrained MLE.
double fiber_sd(const ProfileSpec& spec, const Dataset& data, const Vector& theta) {
  const double h = 1e-3;
  const double f0 = spec.model->log_likelihood(data, theta);
  const double fp = spec.model->log_likelihood(data, spec.fiber_move(theta, h));
  const double fm = spec.model->log_likelihood(data, spec.fiber_move(theta, -h));
  const double curvature = -(fp - 2.0 * f0 + fm) / (h * h);
  return curvature > 0.0 && std::isfinite(curvature) ? 1.0 / std::sqrt(curvature) : 0.1;
}

}  // namespace

ProfileContourValue profile_contour(const ProfileSpec& spec, const Dataset& data, double phi, int M, int probes,
                                    Rng& rng) {
  if (probes < 1) throw Error(ErrorCode::config, "profile contour needs at least one probe");
  if (M < 1) throw Error(ErrorCode::config, "profile contour needs M >= 1");
  ProfileContourValue out;
  if (!spec.phi_in_domain(phi)) return out;
  bool ok = false;
  const double observed = log_profile_ratio(spec, data, phi, &ok);
  if (!ok) throw Error(ErrorCode::non_convergence, "profile: maximization failed at phi = " + std::to_string(phi));
  const MleResult anchor = spec.constrained_mle(data, phi);
  const double sd = fiber_sd(spec, data, anchor.theta);
  static constexpr double kOffsets[] = {0.0, -0.5, 0.5, -1.0, 1.0};
  for (int j = 0; j < probes; ++j) {
    // Beyond the first five probes, keep widening symmetrically.
    const double offset = j < 5 ? kOffsets[j] : (j % 2 == 1 ? -1.0 : 1.0) * (1.0 + 0.5 * ((j - 3) / 2));
    const Vector theta = spec.fiber_move(anchor.theta, offset * sd);
    Rng probe_rng = make_rng(rng());
    int hits = 0;
    for (int m = 0; m < M; ++m) {
      const Dataset sim = spec.model->simulate(theta, data.size(), probe_rng);
      bool sim_ok = false;
      const double r = log_profile_ratio(spec, sim, phi, &sim_ok);
      if (!sim_ok || r <= observed + kTieTolerance) ++hits;
    }
    out.probe_values.push_back(static_cast<double>(hits) / M);
  }
  const auto [lo, hi] = std::minmax_element(out.probe_values.begin(), out.probe_values.end());
  out.value = *hi;
  out.spread = *hi - *lo;
  return out;
}

PossibilityContour make_profile_contour(const ProfileSpec& spec, Dataset data, int M, std::uint64_t seed) {
  auto shared = std::make_shared<const Dataset>(std::move(data));
  PossibilityContour c(
      ContourKind::profile, 1,
      [spec, shared, M](const Vector& phi, std::uint64_t stream) {
        Rng rng = make_rng(stream);
        return profile_contour(spec, *shared, phi(0), M, spec.probes, rng).value;
      },
      ContourMeta{M, seed});
  c.domain = [spec](const Vector& phi) { return spec.phi_in_domain(phi(0)); };
  try {
    const GaussianScalarFamily companion = profile_companion(spec, *shared);
    c.anchor = Anchor{companion.mean(), companion.covariance()};
  } catch (const Error&) {
  }
  return c;
}

GaussianScalarFamily profile_companion(const ProfileSpec& spec, const Dataset& data) {
  const MleInformation mi = mle_and_information(*spec.model, data);
  const Vector grad = spec.interest_gradient(mi.theta);
  const double variance = grad.dot(mi.information.ldlt().solve(grad));
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw Error(ErrorCode::singular_information, "profile: delta-method variance is not positive");
  return GaussianScalarFamily(Vector::Constant(1, spec.interest(mi.theta)), Matrix::Constant(1, 1, 1.0 / variance));
}

// ------------------------------------------------------- empirical risk

RiskSpec quantile_risk(double tau, int bootstrap) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::config, "quantile level tau must lie in (0, 1)");
  if (bootstrap < 1) throw Error(ErrorCode::config, "bootstrap count must be at least 1");
  RiskSpec spec;
  spec.loss = [tau](double x, double theta) { return 0.5 * (std::abs(x - theta) - x + (1.0 - 2.0 * tau) * theta); };
  spec.minimizer = [tau](std::vector<double> x) {
    if (x.empty()) throw Error(ErrorCode::config, "quantile: empty sample");
    const auto n = static_cast<double>(x.size());
    auto k = static_cast<std::size_t>(std::ceil(n * tau - 1e-12));
    k = std::clamp<std::size_t>(k, 1, x.size());
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k - 1), x.end());
    return x[k - 1];
  };
  spec.bootstrap = bootstrap;
  return spec;
}

double empirical_risk(const RiskSpec& spec, const std::vector<double>& x, double theta) {
  double total = 0.0;
  for (double v : x) total += spec.loss(v, theta);
  return total / static_cast<double>(x.size());
}

BootstrapRiskContour::BootstrapRiskContour(std::vector<double> data, RiskSpec spec, Rng& rng)
    : data_(std::move(data)), spec_(std::move(spec)) {
  if (data_.empty()) throw Error(ErrorCode::config, "bootstrap contour: empty sample");
  if (spec_.bootstrap < 1) throw Error(ErrorCode::config, "bootstrap count must be at least 1");
  theta_hat_ = spec_.minimizer(data_);
  if (!std::isfinite(theta_hat_)) throw Error(ErrorCode::non_convergence, "empirical risk minimizer failed");
  risk_hat_ = empirical_risk(spec_, data_, theta_hat_);
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<double> resample(data_.size());
  excess_.reserve(static_cast<std::size_t>(spec_.bootstrap));
  for (int b = 0; b < spec_.bootstrap; ++b) {
    for (auto& v : resample) v = data_[pick(rng)];
    const double star = spec_.minimizer(resample);
    excess_.push_back(std::max(0.0, empirical_risk(spec_, resample, theta_hat_) - empirical_risk(spec_, resample, star)));
  }
  std::sort(excess_.begin(), excess_.end());
}

double BootstrapRiskContour::operator()(double theta) const {
  if (!std::isfinite(theta)) return 0.0;
  const double observed = std::max(0.0, empirical_risk(spec_, data_, theta) - risk_hat_);
  // R(X*, theta_hat) <= R(x, theta)  <=>  excess* >= observed excess.
  const auto it = std::lower_bound(excess_.begin(), excess_.end(), observed - kTieTolerance);
  return static_cast<double>(excess_.end() - it) / static_cast<double>(excess_.size());
}

double empirical_risk_contour(const std::vector<double>& data, const RiskSpec& spec, double theta, Rng& rng) {
  return BootstrapRiskContour(data, spec, rng)(theta);
}

PossibilityContour make_bootstrap_contour(const std::vector<double>& data, const RiskSpec& spec, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  auto built = std::make_shared<const BootstrapRiskContour>(data, spec, rng);
  PossibilityContour c(
      ContourKind::bootstrap, 1, [built](const Vector& theta, std::uint64_t) { return (*built)(theta(0)); },
      ContourMeta{spec.bootstrap, seed});
  const double n = static_cast<double>(data.size());
  double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double var = 0.0;
  for (double v : data) var += (v - mean) * (v - mean);
  var /= std::max(1.0, n - 1.0);
  c.anchor = Anchor{Vector::Constant(1, built->theta_hat()), Matrix::Constant(1, 1, std::max(var, 1e-12) / n)};
  return c;
}

double kernel_density(const std::vector<double>& x, double at) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw Error(ErrorCode::config, "kernel density needs at least two points");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (n - 1.0));
  const double h = 1.06 * sd * std::pow(n, -0.2);
  if (!(h > 0.0)) throw Error(ErrorCode::numerical, "kernel density: zero bandwidth");
  double total = 0.0;
  for (double v : x) {
    const double u = (at - v) / h;
    total += std::exp(-0.5 * u * u);
  }
  return total / (n * h * std::sqrt(2.0 * M_PI));
}

GaussianScalarFamily quantile_companion(const std::vector<double>& data, double tau) {
  const RiskSpec spec = quantile_risk(tau);
  const double theta_hat = spec.minimizer(data);
  const double p = kernel_density(data, theta_hat);
  const double info = static_cast<double>(data.size()) * p * p / (tau * (1.0 - tau));
  return GaussianScalarFamily(Vector::Constant(1, theta_hat), Matrix::Constant(1, 1, info));
}

// ------------------------------------------------------------ censoring

CensoringDistribution kaplan_meier_swapped(const Dataset& data) {
  if (!data.censored()) throw Error(ErrorCode::config, "Kaplan-Meier needs censor flags");
  // Distinct values with (swapped events, count) at each.
  std::map<double, std::pair<int, int>, std::greater<>> at;
  for (Index i = 0; i < data.size(); ++i) {
    auto& cell = at[data.y(i)];
    if (data.observed[static_cast<std::size_t>(i)] == 0) ++cell.first;
    ++cell.second;
  }
  // Risk set at z_j in downward time: observations with z <= z_j.
  int at_risk = static_cast<int>(data.size());
  double survival = 1.0;  // G just above the current value
  std::vector<double> support, masses;
  for (const auto& [z, cell] : at) {
    const auto [events, count] = cell;
    if (events > 0) {
      const double mass = survival * static_cast<double>(events) / at_risk;
      support.push_back(z);
      masses.push_back(mass);
      survival -= mass;
    }
    at_risk -= count;
  }
  std::reverse(support.begin(), support.end());
  std::reverse(masses.begin(), masses.end());
  return CensoringDistribution(std::move(support), std::move(masses));
}

double censored_contour(const LeftCensoredLogNormal& model, const Dataset& data, const Vector& theta, int M, Rng& rng) {
  return mc_contour(model, data, theta, M, rng);
}

PossibilityContour make_censored_contour(LogNormalParametrization parametrization, Dataset data, int M,
                                         std::uint64_t seed) {
  auto model = std::make_shared<LeftCensoredLogNormal>(parametrization, kaplan_meier_swapped(data));
  return make_mc_contour(model, std::move(data), M, seed, ContourKind::censored_plugin);
}

}  // namespace imvar
