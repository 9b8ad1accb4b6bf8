#pragma once

#include "imvar/model.hpp"

#include <vector>

namespace imvar {

/// iid Bernoulli trials; theta in [0, 1]. Responses are 0/1.
class BernoulliModel final : public Model {
 public:
  std::string_view name() const override { return "bernoulli"; }
  Index dimension() const override { return 1; }
  Domain domain() const override { return Domain::unit_interval; }
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  bool has_analytic_score() const override { return true; }
  Matrix information(const Dataset& data, const Vector& theta) const override;

  static Dataset from_counts(Index trials, Index successes);
};

/// iid standard bivariate normal pairs with unknown correlation in (-1, 1).
/// Responses are n x 2.
class BivariateNormalCorrelation final : public Model {
 public:
  std::string_view name() const override { return "bivariate-normal"; }
  Index dimension() const override { return 1; }
  bool in_domain(const Vector& theta) const override;
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  bool has_analytic_score() const override { return true; }
};

/// Logistic regression, P(y = 1 | x) = 1 / (1 + exp(-x'theta)). The design
/// matrix (including any intercept column) is fixed at construction and
/// reused when simulating.
class LogisticRegression final : public Model {
 public:
  explicit LogisticRegression(Matrix design);
  std::string_view name() const override { return "logistic"; }
  Index dimension() const override { return design_.cols(); }
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  bool has_analytic_score() const override { return true; }
  Matrix information(const Dataset& data, const Vector& theta) const override;
  const Matrix& design() const { return design_; }

 private:
  Matrix design_;
};

/// Poisson log-linear regression, log E[y | x] = x'theta.
class PoissonLogLinear final : public Model {
 public:
  explicit PoissonLogLinear(Matrix design);
  std::string_view name() const override { return "poisson"; }
  Index dimension() const override { return design_.cols(); }
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  bool has_analytic_score() const override { return true; }
  Matrix information(const Dataset& data, const Vector& theta) const override;
  const Matrix& design() const { return design_; }

 private:
  Matrix design_;
};

/// n iid draws from categories {0, ..., K-1}; theta on the simplex.
/// Score and information are expressed in the chart of the first K-1
/// coordinates.
class Multinomial final : public Model {
 public:
  explicit Multinomial(Index categories);
  std::string_view name() const override { return "multinomial"; }
  Index dimension() const override { return categories_; }
  Domain domain() const override { return Domain::simplex; }
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  Matrix information(const Dataset& data, const Vector& theta) const override;

  Vector counts(const Dataset& data) const;
  static Dataset from_counts(const std::vector<Index>& counts);

 private:
  Index categories_;
};

enum class GammaParametrization { shape_scale, log_shape_scale, shape_mean };

/// Two-parameter gamma. Internally everything is computed in the
/// shape-scale parametrization and mapped through the chain rule.
class GammaModel final : public Model {
 public:
  explicit GammaModel(GammaParametrization parametrization = GammaParametrization::shape_scale)
      : parametrization_(parametrization) {}
  std::string_view name() const override { return "gamma"; }
  Index dimension() const override { return 2; }
  Domain domain() const override;
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  bool has_analytic_score() const override { return true; }
  Matrix information(const Dataset& data, const Vector& theta) const override;

  GammaParametrization parametrization() const { return parametrization_; }
  /// (shape, scale) for a parameter in this model's parametrization.
  Vector to_shape_scale(const Vector& theta) const;
  Vector from_shape_scale(const Vector& shape_scale) const;

  /// Shape MLE at a fixed mean: solves log k - digamma(k) = c.
  static double solve_shape(double c);

 private:
  GammaParametrization parametrization_;
};

/// Independent X_i ~ N(theta_i, sigma^2), i = 1..dim, with optional lasso
/// penalty (lambda / sigma^2) * |theta|_1 on the log-likelihood, so the
/// maximizer is soft_threshold(x_i, lambda). The information is the
/// unpenalized sigma^-2 I.
class NormalMeans final : public Model {
 public:
  NormalMeans(Index dim, double sigma, double lambda = 0.0);
  std::string_view name() const override { return "normal-means"; }
  Index dimension() const override { return dim_; }
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  bool has_analytic_score() const override { return true; }
  Matrix information(const Dataset& data, const Vector& theta) const override;
  double sigma() const { return sigma_; }
  double lambda() const { return lambda_; }

 private:
  Index dim_;
  double sigma_;
  double lambda_;
};

double soft_threshold(double x, double lambda);

enum class LogNormalParametrization { mean_variance, mean_log_variance };

/// log Y ~ N(theta_1, theta_2); theta_2 is the variance of log Y, or its log.
class LogNormalModel final : public Model {
 public:
  explicit LogNormalModel(LogNormalParametrization parametrization = LogNormalParametrization::mean_variance)
      : parametrization_(parametrization) {}
  std::string_view name() const override { return "lognormal"; }
  Index dimension() const override { return 2; }
  bool in_domain(const Vector& theta) const override;
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;
  Vector score(const Dataset& data, const Vector& theta) const override;
  bool has_analytic_score() const override { return true; }
  Matrix information(const Dataset& data, const Vector& theta) const override;

  LogNormalParametrization parametrization() const { return parametrization_; }
  /// (mean, variance) of log Y.
  Vector to_mean_variance(const Vector& theta) const;
  Vector from_mean_variance(const Vector& mean_variance) const;

 private:
  LogNormalParametrization parametrization_;
};

/// Discrete censoring-level distribution: point masses on ascending support
/// plus a residual mass located below every observation (it never censors).
class CensoringDistribution {
 public:
  CensoringDistribution() = default;
  CensoringDistribution(std::vector<double> support, std::vector<double> masses);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& masses() const { return masses_; }
  double residual_mass() const { return residual_; }
  double cdf(double c) const;
  double mass_at(double c) const;
  double sample(Rng& rng) const;

  /// All mass below the data: no observation is ever censored.
  static CensoringDistribution none() { return {}; }

 private:
  std::vector<double> support_;
  std::vector<double> masses_;
  std::vector<double> cumulative_;
  double residual_ = 1.0;
};

/// Left-censored log-normal: Z = max(Y, C), T = 1(Y >= C) with Y log-normal
/// and C drawn from a plug-in censoring distribution. The likelihood is the
/// theta-part of the separable censored likelihood.
class LeftCensoredLogNormal final : public Model {
 public:
  LeftCensoredLogNormal(LogNormalParametrization parametrization, CensoringDistribution censoring);
  std::string_view name() const override { return "censored-lognormal"; }
  Index dimension() const override { return 2; }
  bool in_domain(const Vector& theta) const override;
  double log_likelihood(const Dataset& data, const Vector& theta) const override;
  Dataset simulate(const Vector& theta, Index n, Rng& rng) const override;
  MleResult maximize(const Dataset& data) const override;

  const CensoringDistribution& censoring() const { return censoring_; }
  const LogNormalModel& base() const { return base_; }

  /// Full log-likelihood in (theta, G) including the censoring factors.
  double augmented_log_likelihood(const Dataset& data, const Vector& theta, const CensoringDistribution& g) const;

 private:
  LogNormalModel base_;
  CensoringDistribution censoring_;
};

}  // namespace imvar
