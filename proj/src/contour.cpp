#include "imvar/contour.hpp"
#include "imvar/parallel.hpp"
#include "imvar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace imvar {

std::string_view to_string(ContourKind kind) {
  switch (kind) {
    case ContourKind::exact_discrete: return "exact-discrete";
    case ContourKind::monte_carlo: return "monte-carlo";
    case ContourKind::closed_form_gaussian: return "closed-form-gaussian";
    case ContourKind::dirichlet_mc: return "dirichlet-mc";
    case ContourKind::profile: return "profile";
    case ContourKind::bootstrap: return "bootstrap";
    case ContourKind::censored_plugin: return "censored-plugin";
  }
  return "unknown";
}

PossibilityContour::PossibilityContour(ContourKind kind, Index dimension, Evaluator evaluator, ContourMeta meta)
    : kind_(kind), dimension_(dimension), evaluator_(std::move(evaluator)), meta_(meta) {}

bool PossibilityContour::in_domain(const Vector& theta) const {
  if (theta.size() != dimension_ || !theta.allFinite()) return false;
  return !domain || domain(theta);
}

double PossibilityContour::operator()(const Vector& theta, std::uint64_t stream) const {
  if (!in_domain(theta)) return 0.0;
  const double v = evaluator_(theta, stream);
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

namespace {

double binomial_log_lik(Index n, Index s, double theta) {
  const double inf = std::numeric_limits<double>::infinity();
  double ll = 0.0;
  if (s > 0) ll += theta > 0.0 ? static_cast<double>(s) * std::log(theta) : -inf;
  if (s < n) ll += theta < 1.0 ? static_cast<double>(n - s) * std::log1p(-theta) : -inf;
  return ll;
}

bool below(double log_r, double log_r_obs, TieRule tie) {
  if (tie == TieRule::inclusive) return log_r <= log_r_obs + kTieTolerance;
  return log_r < log_r_obs - kTieTolerance;
}

}  // namespace

double exact_binomial_contour(Index n, Index s_obs, double theta, TieRule tie) {
  if (n < 1 || s_obs < 0 || s_obs > n || !(theta >= 0.0 && theta <= 1.0))
    throw Error(ErrorCode::config, "exact binomial contour: need 0 <= s_obs <= n and theta in [0, 1]");
  auto log_r = [&](Index s) {
    return binomial_log_lik(n, s, theta) - binomial_log_lik(n, s, static_cast<double>(s) / static_cast<double>(n));
  };
  const double r_obs = log_r(s_obs);
  double total = 0.0;
  for (Index s = 0; s <= n; ++s) {
    const double lp = std::lgamma(n + 1.0) - std::lgamma(s + 1.0) - std::lgamma(n - s + 1.0) + binomial_log_lik(n, s, theta);
    const double r = log_r(s);
    // -inf on both sides is a tie.
    const bool hit = (r == r_obs) ? tie == TieRule::inclusive : below(r, r_obs, tie);
    if (hit) total += std::exp(lp);
  }
  return std::min(total, 1.0);
}

PossibilityContour make_exact_binomial_contour(Index n, Index s_obs, TieRule tie) {
  if (n < 1 || s_obs < 0 || s_obs > n) throw Error(ErrorCode::config, "exact binomial contour: need 0 <= s_obs <= n");
  PossibilityContour c(ContourKind::exact_discrete, 1,
                       [=](const Vector& theta, std::uint64_t) { return exact_binomial_contour(n, s_obs, theta(0), tie); });
  c.domain = [](const Vector& theta) { return theta(0) >= 0.0 && theta(0) <= 1.0; };
  const double p = static_cast<double>(s_obs) / static_cast<double>(n);
  if (s_obs > 0 && s_obs < n)
    c.anchor = Anchor{Vector::Constant(1, p), Matrix::Constant(1, 1, p * (1.0 - p) / static_cast<double>(n))};
  return c;
}

double mc_contour(const Model& model, const Dataset& data, double sup_log_likelihood, const Vector& theta, int M,
                  Rng& rng, TieRule tie) {
  if (M < 1) throw Error(ErrorCode::config, "mc_contour: M must be at least 1");
  if (!model.in_domain(theta)) return 0.0;
  const double ll_obs = model.log_likelihood(data, theta);
  if (std::isnan(ll_obs)) return 0.0;
  const double r_obs = std::min(0.0, ll_obs - sup_log_likelihood);
  int hits = 0;
  for (int m = 0; m < M; ++m) {
    const Dataset sim = model.simulate(theta, data.size(), rng);
    const MleResult fit = model.maximize(sim);
    if (!fit.converged || !std::isfinite(fit.log_likelihood)) {
      if (tie == TieRule::inclusive) ++hits;
      continue;
    }
    const double ll = model.log_likelihood(sim, theta);
    const double r = std::min(0.0, ll - fit.log_likelihood);
    const bool hit = (r == r_obs) ? tie == TieRule::inclusive : below(r, r_obs, tie);
    if (hit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(M);
}

double mc_contour(const Model& model, const Dataset& data, const Vector& theta, int M, Rng& rng, TieRule tie) {
  const MleResult fit = model.maximize(data);
  if (!fit.converged || !std::isfinite(fit.log_likelihood))
    throw Error(ErrorCode::non_convergence, std::string(model.name()) + ": likelihood maximization failed");
  return mc_contour(model, data, fit.log_likelihood, theta, M, rng, tie);
}

PossibilityContour make_mc_contour(ModelPtr model, Dataset data, int M, std::uint64_t seed, ContourKind kind,
                                   TieRule tie) {
  if (M < 1) throw Error(ErrorCode::config, "mc_contour: M must be at least 1");
  const MleResult fit = model->maximize(data);
  if (!fit.converged || !std::isfinite(fit.log_likelihood))
    throw Error(ErrorCode::non_convergence, std::string(model->name()) + ": likelihood maximization failed");
  const double sup = fit.log_likelihood;
  std::optional<Anchor> anchor;
  try {
    const MleInformation mi = mle_and_information(*model, data);
    Matrix cov = mi.information.inverse();
    anchor = Anchor{mi.theta, 0.5 * (cov + cov.transpose())};
  } catch (const Error&) {
  }
  auto shared = std::make_shared<const Dataset>(std::move(data));
  PossibilityContour c(
      kind, model->dimension(),
      [model, shared, sup, M, tie](const Vector& theta, std::uint64_t stream) {
        Rng rng = make_rng(stream);
        return mc_contour(*model, *shared, sup, theta, M, rng, tie);
      },
      ContourMeta{M, seed});
  c.domain = [model](const Vector& theta) { return model->in_domain(theta); };
  if (anchor) {
    // Anchor coordinates may lie in a lower-dimensional chart (multinomial).
    if (anchor->covariance.rows() == model->dimension()) c.anchor = std::move(anchor);
  }
  return c;
}

double AxisSpec::node(Index i) const {
  if (count <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

double AxisSpec::spacing() const { return count <= 1 ? 1.0 : (hi - lo) / static_cast<double>(count - 1); }

std::size_t ContourGrid::node_count(const std::vector<AxisSpec>& axes) {
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.count < 1) throw Error(ErrorCode::config, "grid axis needs at least one node");
    total *= static_cast<std::size_t>(a.count);
  }
  return total;
}

Vector ContourGrid::node(std::size_t index) const {
  Vector theta(dimension());
  for (Index k = dimension() - 1; k >= 0; --k) {
    const auto& a = axes[static_cast<std::size_t>(k)];
    const auto count = static_cast<std::size_t>(a.count);
    theta(k) = a.node(static_cast<Index>(index % count));
    index /= count;
  }
  return theta;
}

ContourGrid grid_eval(const PossibilityContour& contour, const std::vector<AxisSpec>& axes, unsigned workers,
                      std::uint64_t master_seed) {
  if (static_cast<Index>(axes.size()) != contour.dimension())
    throw Error(ErrorCode::config, "grid dimension does not match the contour");
  ContourGrid grid;
  grid.axes = axes;
  const std::size_t total = ContourGrid::node_count(axes);
  grid.values.assign(total, 0.0);
  grid.domain_violation.assign(total, 0);
  parallel_for(total, workers, [&](std::size_t i) {
    const Vector theta = grid.node(i);
    if (!contour.in_domain(theta)) {
      grid.domain_violation[i] = 1;
      return;
    }
    grid.values[i] = contour(theta, stream_seed(master_seed, {i}));
  });
  return grid;
}

std::vector<std::size_t> alpha_cut(const ContourGrid& grid, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::config, "alpha must lie in (0, 1)");
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    if (grid.values[i] > alpha) nodes.push_back(i);
  return nodes;
}

double l1_distance(const ContourGrid& a, const ContourGrid& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorCode::config, "l1_distance: grids differ in size");
  double cell = 1.0;
  for (const auto& axis : a.axes) cell *= axis.spacing();
  double total = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) total += std::abs(a.values[i] - b.values[i]);
  return total * cell;
}

}  // namespace imvar
