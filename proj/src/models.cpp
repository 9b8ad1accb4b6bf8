#include "imvar/models.hpp"
#include "imvar/optimize.hpp"
#include "imvar/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace imvar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  if (y <= 0.0) return kNegInf;
  return x * std::log(y);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sum_response(const Dataset& data) { return data.response.col(0).sum(); }

void require_rows(const Dataset& data, Index rows, std::string_view model) {
  if (data.size() != rows)
    throw Error(ErrorCode::config, std::string(model) + ": dataset size does not match the design");
}

}  // namespace

// ---------------------------------------------------------------- Bernoulli

double BernoulliModel::log_likelihood(const Dataset& data, const Vector& theta) const {
  const double p = theta(0);
  if (p < 0.0 || p > 1.0) return kNegInf;
  const double s = sum_response(data);
  const double n = static_cast<double>(data.size());
  return xlogy(s, p) + xlogy(n - s, 1.0 - p);
}

Dataset BernoulliModel::simulate(const Vector& theta, Index n, Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset d;
  d.response.resize(n, 1);
  for (Index i = 0; i < n; ++i) d.response(i, 0) = unif(rng) < theta(0) ? 1.0 : 0.0;
  return d;
}

MleResult BernoulliModel::maximize(const Dataset& data) const {
  const double s = sum_response(data);
  const double n = static_cast<double>(data.size());
  MleResult r;
  r.theta = Vector::Constant(1, s / n);
  r.log_likelihood = log_likelihood(data, r.theta);
  r.interior = s > 0.0 && s < n;
  return r;
}

Vector BernoulliModel::score(const Dataset& data, const Vector& theta) const {
  const double s = sum_response(data);
  const double n = static_cast<double>(data.size());
  const double p = theta(0);
  return Vector::Constant(1, s / p - (n - s) / (1.0 - p));
}

Matrix BernoulliModel::information(const Dataset& data, const Vector& theta) const {
  const double s = sum_response(data);
  const double n = static_cast<double>(data.size());
  const double p = theta(0);
  return Matrix::Constant(1, 1, s / (p * p) + (n - s) / ((1.0 - p) * (1.0 - p)));
}

Dataset BernoulliModel::from_counts(Index trials, Index successes) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw Error(ErrorCode::config, "binomial counts must satisfy 0 <= successes <= trials, trials >= 1");
  Dataset d;
  d.response = Matrix::Zero(trials, 1);
  d.response.topRows(successes).setOnes();
  return d;
}

// ------------------------------------------------ bivariate normal correlation

namespace {

struct PairStats {
  double n, s11_plus_s22, s12;
};

PairStats pair_stats(const Dataset& data) {
  if (data.response.cols() != 2) throw Error(ErrorCode::config, "bivariate-normal: responses must have two columns");
  const auto x1 = data.response.col(0);
  const auto x2 = data.response.col(1);
  return {static_cast<double>(data.size()), x1.squaredNorm() + x2.squaredNorm(), x1.dot(x2)};
}

double bvn_loglik(const PairStats& st, double rho) {
  if (!(std::abs(rho) < 1.0)) return kNegInf;
  const double one_m = 1.0 - rho * rho;
  return -st.n * std::log(2.0 * M_PI) - 0.5 * st.n * std::log(one_m) -
         (st.s11_plus_s22 - 2.0 * rho * st.s12) / (2.0 * one_m);
}

/// Real roots of x^3 + a x^2 + b x + c.
std::vector<double> cubic_roots(double a, double b, double c) {
  const double q = (a * a - 3.0 * b) / 9.0;
  const double r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
  std::vector<double> roots;
  if (r * r < q * q * q) {
    const double t = std::acos(std::clamp(r / std::sqrt(q * q * q), -1.0, 1.0));
    const double m = -2.0 * std::sqrt(q);
    roots = {m * std::cos(t / 3.0) - a / 3.0, m * std::cos((t + 2.0 * M_PI) / 3.0) - a / 3.0,
             m * std::cos((t - 2.0 * M_PI) / 3.0) - a / 3.0};
  } else {
    const double big_a = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r * r - q * q * q)), r);
    const double big_b = big_a == 0.0 ? 0.0 : q / big_a;
    roots = {big_a + big_b - a / 3.0};
  }
  return roots;
}

}  // namespace

bool BivariateNormalCorrelation::in_domain(const Vector& theta) const {
  return theta.size() == 1 && std::isfinite(theta(0)) && std::abs(theta(0)) < 1.0;
}

double BivariateNormalCorrelation::log_likelihood(const Dataset& data, const Vector& theta) const {
  return bvn_loglik(pair_stats(data), theta(0));
}

Dataset BivariateNormalCorrelation::simulate(const Vector& theta, Index n, Rng& rng) const {
  std::normal_distribution<double> norm;
  const double rho = theta(0);
  const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  Dataset d;
  d.response.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double z1 = norm(rng);
    const double z2 = norm(rng);
    d.response(i, 0) = z1;
    d.response(i, 1) = rho * z1 + c * z2;
  }
  return d;
}

MleResult BivariateNormalCorrelation::maximize(const Dataset& data) const {
  const PairStats st = pair_stats(data);
  // Stationary points solve -n r^3 + s12 r^2 + (n - s) r + s12 = 0.
  const auto roots = cubic_roots(-st.s12 / st.n, (st.s11_plus_s22 - st.n) / st.n, -st.s12 / st.n);
  MleResult r;
  r.theta = Vector::Zero(1);
  r.log_likelihood = kNegInf;
  for (double root : roots) {
    double x = root;
    for (int k = 0; k < 3; ++k) {  // polish
      const double p = -st.n * x * x * x + st.s12 * x * x + (st.n - st.s11_plus_s22) * x + st.s12;
      const double dp = -3.0 * st.n * x * x + 2.0 * st.s12 * x + (st.n - st.s11_plus_s22);
      if (dp == 0.0) break;
      x -= p / dp;
    }
    if (!(std::abs(x) < 1.0)) continue;
    const double ll = bvn_loglik(st, x);
    if (ll > r.log_likelihood) {
      r.log_likelihood = ll;
      r.theta(0) = x;
    }
  }
  if (!std::isfinite(r.log_likelihood)) {
    r.interior = false;
    r.converged = false;
  }
  return r;
}

Vector BivariateNormalCorrelation::score(const Dataset& data, const Vector& theta) const {
  const PairStats st = pair_stats(data);
  const double rho = theta(0);
  const double one_m = 1.0 - rho * rho;
  const double a = st.s11_plus_s22 - 2.0 * rho * st.s12;
  return Vector::Constant(1, st.n * rho / one_m + st.s12 / one_m - rho * a / (one_m * one_m));
}

// ---------------------------------------------------------------- logistic

LogisticRegression::LogisticRegression(Matrix design) : design_(std::move(design)) {
  if (design_.cols() < 1 || design_.rows() < 1) throw Error(ErrorCode::config, "logistic: empty design matrix");
}

double LogisticRegression::log_likelihood(const Dataset& data, const Vector& theta) const {
  require_rows(data, design_.rows(), name());
  const Vector eta = design_ * theta;
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) ll += data.y(i) * eta(i) - softplus(eta(i));
  return ll;
}

Dataset LogisticRegression::simulate(const Vector& theta, Index n, Rng& rng) const {
  if (n != design_.rows()) throw Error(ErrorCode::config, "logistic: simulated size must match the design");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector eta = design_ * theta;
  Dataset d;
  d.response.resize(n, 1);
  d.covariates = design_;
  for (Index i = 0; i < n; ++i) d.response(i, 0) = unif(rng) < 1.0 / (1.0 + std::exp(-eta(i))) ? 1.0 : 0.0;
  return d;
}

Vector LogisticRegression::score(const Dataset& data, const Vector& theta) const {
  const Vector eta = design_ * theta;
  Vector resid(eta.size());
  for (Index i = 0; i < eta.size(); ++i) resid(i) = data.y(i) - 1.0 / (1.0 + std::exp(-eta(i)));
  return design_.transpose() * resid;
}

Matrix LogisticRegression::information(const Dataset&, const Vector& theta) const {
  const Vector eta = design_ * theta;
  Vector w(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-eta(i)));
    w(i) = p * (1.0 - p);
  }
  return design_.transpose() * w.asDiagonal() * design_;
}

MleResult LogisticRegression::maximize(const Dataset& data) const {
  require_rows(data, design_.rows(), name());
  optim::NewtonOptions opts;
  opts.max_iterations = 60;
  const auto res = optim::newton_maximize([&](const Vector& t) { return log_likelihood(data, t); },
                                          [&](const Vector& t) { return score(data, t); },
                                          [&](const Vector& t) { return Matrix(-information(data, t)); },
                                          Vector::Zero(design_.cols()), opts);
  MleResult r{res.x, res.value, res.converged, res.converged};
  // Separated data: the supremum is approached at infinity.
  if (res.converged && res.x.cwiseAbs().maxCoeff() > 50.0) r.interior = false;
  return r;
}

// ---------------------------------------------------------------- Poisson

PoissonLogLinear::PoissonLogLinear(Matrix design) : design_(std::move(design)) {
  if (design_.cols() < 1 || design_.rows() < 1) throw Error(ErrorCode::config, "poisson: empty design matrix");
}

double PoissonLogLinear::log_likelihood(const Dataset& data, const Vector& theta) const {
  require_rows(data, design_.rows(), name());
  const Vector eta = design_ * theta;
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) ll += data.y(i) * eta(i) - std::exp(eta(i)) - std::lgamma(data.y(i) + 1.0);
  return ll;
}

Dataset PoissonLogLinear::simulate(const Vector& theta, Index n, Rng& rng) const {
  if (n != design_.rows()) throw Error(ErrorCode::config, "poisson: simulated size must match the design");
  const Vector eta = design_ * theta;
  Dataset d;
  d.response.resize(n, 1);
  d.covariates = design_;
  for (Index i = 0; i < n; ++i) {
    std::poisson_distribution<long> pois(std::exp(eta(i)));
    d.response(i, 0) = static_cast<double>(pois(rng));
  }
  return d;
}

Vector PoissonLogLinear::score(const Dataset& data, const Vector& theta) const {
  const Vector eta = design_ * theta;
  Vector resid(eta.size());
  for (Index i = 0; i < eta.size(); ++i) resid(i) = data.y(i) - std::exp(eta(i));
  return design_.transpose() * resid;
}

Matrix PoissonLogLinear::information(const Dataset&, const Vector& theta) const {
  const Vector mu = (design_ * theta).array().exp();
  return design_.transpose() * mu.asDiagonal() * design_;
}

MleResult PoissonLogLinear::maximize(const Dataset& data) const {
  require_rows(data, design_.rows(), name());
  Vector start = Vector::Zero(design_.cols());
  const double mean = data.response.col(0).mean();
  // Intercept start when the first column is constant.
  if ((design_.col(0).array() == design_(0, 0)).all() && design_(0, 0) != 0.0 && mean > 0.0)
    start(0) = std::log(mean) / design_(0, 0);
  optim::NewtonOptions opts;
  opts.max_iterations = 60;
  const auto res = optim::newton_maximize([&](const Vector& t) { return log_likelihood(data, t); },
                                          [&](const Vector& t) { return score(data, t); },
                                          [&](const Vector& t) { return Matrix(-information(data, t)); }, start, opts);
  MleResult r{res.x, res.value, res.converged, res.converged};
  if (res.converged && res.x.cwiseAbs().maxCoeff() > 50.0) r.interior = false;
  return r;
}

// ---------------------------------------------------------------- multinomial

Multinomial::Multinomial(Index categories) : categories_(categories) {
  if (categories < 2) throw Error(ErrorCode::config, "multinomial: need at least two categories");
}

Vector Multinomial::counts(const Dataset& data) const {
  Vector c = Vector::Zero(categories_);
  for (Index i = 0; i < data.size(); ++i) {
    const auto k = static_cast<Index>(data.y(i));
    if (k < 0 || k >= categories_) throw Error(ErrorCode::config, "multinomial: category label out of range");
    c(k) += 1.0;
  }
  return c;
}

Dataset Multinomial::from_counts(const std::vector<Index>& counts) {
  Dataset d;
  const Index n = std::accumulate(counts.begin(), counts.end(), Index{0});
  d.response.resize(n, 1);
  Index row = 0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (Index j = 0; j < counts[k]; ++j) d.response(row++, 0) = static_cast<double>(k);
  return d;
}

double Multinomial::log_likelihood(const Dataset& data, const Vector& theta) const {
  const Vector c = counts(data);
  double ll = 0.0;
  for (Index k = 0; k < categories_; ++k) ll += xlogy(c(k), theta(k));
  return ll;
}

Dataset Multinomial::simulate(const Vector& theta, Index n, Rng& rng) const {
  std::discrete_distribution<int> cat(theta.data(), theta.data() + theta.size());
  Dataset d;
  d.response.resize(n, 1);
  for (Index i = 0; i < n; ++i) d.response(i, 0) = static_cast<double>(cat(rng));
  return d;
}

MleResult Multinomial::maximize(const Dataset& data) const {
  const Vector c = counts(data);
  MleResult r;
  r.theta = c / c.sum();
  r.log_likelihood = log_likelihood(data, r.theta);
  r.interior = (c.array() > 0.0).all();
  return r;
}

Vector Multinomial::score(const Dataset& data, const Vector& theta) const {
  const Vector c = counts(data);
  const Index k = categories_ - 1;
  return (c.head(k).array() / theta.head(k).array() - c(k) / theta(k)).matrix();
}

Matrix Multinomial::information(const Dataset& data, const Vector& theta) const {
  const Vector c = counts(data);
  const Index k = categories_ - 1;
  Matrix info = Matrix::Constant(k, k, c(k) / (theta(k) * theta(k)));
  for (Index j = 0; j < k; ++j) info(j, j) += c(j) / (theta(j) * theta(j));
  return info;
}

// ---------------------------------------------------------------- gamma

namespace {

struct GammaStats {
  double n, sum, sum_log;
};

GammaStats gamma_stats(const Dataset& data) {
  GammaStats st{static_cast<double>(data.size()), 0.0, 0.0};
  for (Index i = 0; i < data.size(); ++i) {
    st.sum += data.y(i);
    st.sum_log += std::log(data.y(i));
  }
  return st;
}

double gamma_loglik_natural(const GammaStats& st, double k, double s) {
  if (!(k > 0.0) || !(s > 0.0)) return kNegInf;
  return (k - 1.0) * st.sum_log - st.sum / s - st.n * k * std::log(s) - st.n * stats::lgamma(k);
}

}  // namespace

Domain GammaModel::domain() const {
  return parametrization_ == GammaParametrization::log_shape_scale ? Domain::unconstrained : Domain::positive_orthant;
}

Vector GammaModel::to_shape_scale(const Vector& theta) const {
  switch (parametrization_) {
    case GammaParametrization::shape_scale: return theta;
    case GammaParametrization::log_shape_scale: return theta.array().exp();
    case GammaParametrization::shape_mean: return Vector{{theta(0), theta(1) / theta(0)}};
  }
  return theta;
}

Vector GammaModel::from_shape_scale(const Vector& ks) const {
  switch (parametrization_) {
    case GammaParametrization::shape_scale: return ks;
    case GammaParametrization::log_shape_scale: return ks.array().log();
    case GammaParametrization::shape_mean: return Vector{{ks(0), ks(0) * ks(1)}};
  }
  return ks;
}

double GammaModel::log_likelihood(const Dataset& data, const Vector& theta) const {
  if (!in_domain(theta)) return kNegInf;
  const Vector ks = to_shape_scale(theta);
  return gamma_loglik_natural(gamma_stats(data), ks(0), ks(1));
}

Dataset GammaModel::simulate(const Vector& theta, Index n, Rng& rng) const {
  const Vector ks = to_shape_scale(theta);
  std::gamma_distribution<double> gamma(ks(0), ks(1));
  Dataset d;
  d.response.resize(n, 1);
  for (Index i = 0; i < n; ++i) d.response(i, 0) = gamma(rng);
  return d;
}

double GammaModel::solve_shape(double c) {
  if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
  // Minka's starting value, then Newton on log k - digamma(k) = c.
  double k = (3.0 - c + std::sqrt((c - 3.0) * (c - 3.0) + 24.0 * c)) / (12.0 * c);
  for (int it = 0; it < 50; ++it) {
    const double f = std::log(k) - stats::digamma(k) - c;
    const double df = 1.0 / k - stats::trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0)) next = 0.5 * k;
    if (std::abs(next - k) <= 1e-14 * k) {
      k = next;
      break;
    }
    k = next;
  }
  return k;
}

MleResult GammaModel::maximize(const Dataset& data) const {
  const GammaStats st = gamma_stats(data);
  MleResult r;
  const double mean = st.sum / st.n;
  const double c = std::log(mean) - st.sum_log / st.n;
  if (!std::isfinite(c) || !(c > 1e-14)) {
    r.theta = from_shape_scale(Vector{{1.0, mean}});
    r.log_likelihood = kNegInf;
    r.interior = false;
    r.converged = false;
    return r;
  }
  const double k = solve_shape(c);
  const double s = mean / k;
  r.theta = from_shape_scale(Vector{{k, s}});
  r.log_likelihood = gamma_loglik_natural(st, k, s);
  return r;
}

namespace {

// Score and Hessian in the shape-scale parametrization.
void gamma_natural_derivatives(const GammaStats& st, double k, double s, Vector& g, Matrix& h) {
  g.resize(2);
  h.resize(2, 2);
  g(0) = st.sum_log - st.n * std::log(s) - st.n * stats::digamma(k);
  g(1) = st.sum / (s * s) - st.n * k / s;
  h(0, 0) = -st.n * stats::trigamma(k);
  h(0, 1) = h(1, 0) = -st.n / s;
  h(1, 1) = -2.0 * st.sum / (s * s * s) + st.n * k / (s * s);
}

}  // namespace

Vector GammaModel::score(const Dataset& data, const Vector& theta) const {
  const GammaStats st = gamma_stats(data);
  const Vector ks = to_shape_scale(theta);
  Vector g;
  Matrix h;
  gamma_natural_derivatives(st, ks(0), ks(1), g, h);
  switch (parametrization_) {
    case GammaParametrization::shape_scale: return g;
    case GammaParametrization::log_shape_scale: return g.cwiseProduct(ks);
    case GammaParametrization::shape_mean: {
      // s = mean / k: d(k, s)/d(k, mean) = [[1, 0], [-mean/k^2, 1/k]].
      const double k = ks(0), mean = theta(1);
      return Vector{{g(0) - g(1) * mean / (k * k), g(1) / k}};
    }
  }
  return g;
}

Matrix GammaModel::information(const Dataset& data, const Vector& theta) const {
  const GammaStats st = gamma_stats(data);
  const Vector ks = to_shape_scale(theta);
  Vector g;
  Matrix h;
  gamma_natural_derivatives(st, ks(0), ks(1), g, h);
  switch (parametrization_) {
    case GammaParametrization::shape_scale:
      return -h;
    case GammaParametrization::log_shape_scale: {
      const Matrix d = ks.asDiagonal();
      Matrix hh = d * h * d;
      hh.diagonal() += g.cwiseProduct(ks);
      return -hh;
    }
    case GammaParametrization::shape_mean: {
      const double k = ks(0), mean = theta(1);
      Matrix jac(2, 2);
      jac << 1.0, 0.0, -mean / (k * k), 1.0 / k;
      Matrix hh = jac.transpose() * h * jac;
      // Second derivatives of s = mean / k.
      hh(0, 0) += g(1) * 2.0 * mean / (k * k * k);
      hh(0, 1) += g(1) * (-1.0 / (k * k));
      hh(1, 0) += g(1) * (-1.0 / (k * k));
      return -hh;
    }
  }
  return -h;
}

// ---------------------------------------------------------------- normal means

NormalMeans::NormalMeans(Index dim, double sigma, double lambda) : dim_(dim), sigma_(sigma), lambda_(lambda) {
  if (dim < 1 || !(sigma > 0.0) || !(lambda >= 0.0))
    throw Error(ErrorCode::config, "normal-means: need dim >= 1, sigma > 0, lambda >= 0");
}

double soft_threshold(double x, double lambda) {
  const double mag = std::abs(x) - lambda;
  return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

double NormalMeans::log_likelihood(const Dataset& data, const Vector& theta) const {
  const auto x = data.response.col(0);
  const double n = static_cast<double>(dim_);
  return -0.5 * n * std::log(2.0 * M_PI * sigma_ * sigma_) - (x - theta).squaredNorm() / (2.0 * sigma_ * sigma_) -
         lambda_ / (sigma_ * sigma_) * theta.lpNorm<1>();
}

Dataset NormalMeans::simulate(const Vector& theta, Index n, Rng& rng) const {
  if (n != dim_) throw Error(ErrorCode::config, "normal-means: one observation per mean");
  std::normal_distribution<double> norm(0.0, sigma_);
  Dataset d;
  d.response.resize(n, 1);
  for (Index i = 0; i < n; ++i) d.response(i, 0) = theta(i) + norm(rng);
  return d;
}

MleResult NormalMeans::maximize(const Dataset& data) const {
  if (data.size() != dim_) throw Error(ErrorCode::config, "normal-means: one observation per mean");
  MleResult r;
  r.theta.resize(dim_);
  for (Index i = 0; i < dim_; ++i) r.theta(i) = soft_threshold(data.y(i), lambda_);
  r.log_likelihood = log_likelihood(data, r.theta);
  return r;
}

Vector NormalMeans::score(const Dataset& data, const Vector& theta) const {
  Vector g = (data.response.col(0) - theta) / (sigma_ * sigma_);
  if (lambda_ > 0.0)
    for (Index i = 0; i < dim_; ++i)
      if (theta(i) != 0.0) g(i) -= lambda_ / (sigma_ * sigma_) * (theta(i) > 0 ? 1.0 : -1.0);
  return g;
}

Matrix NormalMeans::information(const Dataset&, const Vector&) const {
  return Matrix::Identity(dim_, dim_) / (sigma_ * sigma_);
}

// ---------------------------------------------------------------- log-normal

namespace {

struct LogStats {
  double n, sum, sum_sq;  // of log y
};

LogStats log_stats(const Dataset& data) {
  LogStats st{static_cast<double>(data.size()), 0.0, 0.0};
  for (Index i = 0; i < data.size(); ++i) {
    const double l = std::log(data.y(i));
    st.sum += l;
    st.sum_sq += l * l;
  }
  return st;
}

}  // namespace

bool LogNormalModel::in_domain(const Vector& theta) const {
  if (theta.size() != 2 || !theta.allFinite()) return false;
  return parametrization_ == LogNormalParametrization::mean_log_variance || theta(1) > 0.0;
}

Vector LogNormalModel::to_mean_variance(const Vector& theta) const {
  if (parametrization_ == LogNormalParametrization::mean_variance) return theta;
  return Vector{{theta(0), std::exp(theta(1))}};
}

Vector LogNormalModel::from_mean_variance(const Vector& mv) const {
  if (parametrization_ == LogNormalParametrization::mean_variance) return mv;
  return Vector{{mv(0), std::log(mv(1))}};
}

double LogNormalModel::log_likelihood(const Dataset& data, const Vector& theta) const {
  if (!in_domain(theta)) return kNegInf;
  const Vector mv = to_mean_variance(theta);
  const LogStats st = log_stats(data);
  const double mu = mv(0), v = mv(1);
  const double ss = st.sum_sq - 2.0 * mu * st.sum + st.n * mu * mu;
  return -st.sum - 0.5 * st.n * std::log(2.0 * M_PI * v) - ss / (2.0 * v);
}

Dataset LogNormalModel::simulate(const Vector& theta, Index n, Rng& rng) const {
  const Vector mv = to_mean_variance(theta);
  std::normal_distribution<double> norm(mv(0), std::sqrt(mv(1)));
  Dataset d;
  d.response.resize(n, 1);
  for (Index i = 0; i < n; ++i) d.response(i, 0) = std::exp(norm(rng));
  return d;
}

MleResult LogNormalModel::maximize(const Dataset& data) const {
  const LogStats st = log_stats(data);
  const double mu = st.sum / st.n;
  const double v = st.sum_sq / st.n - mu * mu;
  MleResult r;
  if (!(v > 0.0) || !std::isfinite(v)) {
    r.theta = from_mean_variance(Vector{{mu, 1.0}});
    r.log_likelihood = kNegInf;
    r.interior = r.converged = false;
    return r;
  }
  r.theta = from_mean_variance(Vector{{mu, v}});
  r.log_likelihood = log_likelihood(data, r.theta);
  return r;
}

Vector LogNormalModel::score(const Dataset& data, const Vector& theta) const {
  const Vector mv = to_mean_variance(theta);
  const LogStats st = log_stats(data);
  const double mu = mv(0), v = mv(1);
  const double s1 = st.sum - st.n * mu;
  const double ss = st.sum_sq - 2.0 * mu * st.sum + st.n * mu * mu;
  Vector g{{s1 / v, -st.n / (2.0 * v) + ss / (2.0 * v * v)}};
  if (parametrization_ == LogNormalParametrization::mean_log_variance) g(1) *= v;
  return g;
}

Matrix LogNormalModel::information(const Dataset& data, const Vector& theta) const {
  const Vector mv = to_mean_variance(theta);
  const LogStats st = log_stats(data);
  const double mu = mv(0), v = mv(1);
  const double s1 = st.sum - st.n * mu;
  const double ss = st.sum_sq - 2.0 * mu * st.sum + st.n * mu * mu;
  Matrix h(2, 2);
  h(0, 0) = -st.n / v;
  h(0, 1) = h(1, 0) = -s1 / (v * v);
  h(1, 1) = st.n / (2.0 * v * v) - ss / (v * v * v);
  if (parametrization_ == LogNormalParametrization::mean_log_variance) {
    const double gv = -st.n / (2.0 * v) + ss / (2.0 * v * v);
    h(0, 1) *= v;
    h(1, 0) *= v;
    h(1, 1) = h(1, 1) * v * v + gv * v;
  }
  return -h;
}

// ---------------------------------------------------------------- censoring

CensoringDistribution::CensoringDistribution(std::vector<double> support, std::vector<double> masses)
    : support_(std::move(support)), masses_(std::move(masses)) {
  if (support_.size() != masses_.size()) throw Error(ErrorCode::config, "censoring: support and masses differ in length");
  if (!std::is_sorted(support_.begin(), support_.end()))
    throw Error(ErrorCode::config, "censoring: support must be ascending");
  double total = 0.0;
  for (double m : masses_) {
    if (!(m >= 0.0)) throw Error(ErrorCode::config, "censoring: masses must be nonnegative");
    total += m;
  }
  if (total > 1.0 + 1e-12) throw Error(ErrorCode::config, "censoring: masses sum above one");
  residual_ = std::max(0.0, 1.0 - total);
  cumulative_.resize(masses_.size());
  double acc = residual_;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    acc += masses_[i];
    cumulative_[i] = acc;
  }
}

double CensoringDistribution::cdf(double c) const {
  const auto it = std::upper_bound(support_.begin(), support_.end(), c);
  if (it == support_.begin()) return residual_;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double CensoringDistribution::mass_at(double c) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), c);
  if (it == support_.end() || *it != c) return 0.0;
  return masses_[static_cast<std::size_t>(it - support_.begin())];
}

double CensoringDistribution::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  if (u < residual_ || support_.empty()) return -std::numeric_limits<double>::infinity();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return support_.back();
  return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

LeftCensoredLogNormal::LeftCensoredLogNormal(LogNormalParametrization parametrization, CensoringDistribution censoring)
    : base_(parametrization), censoring_(std::move(censoring)) {}

bool LeftCensoredLogNormal::in_domain(const Vector& theta) const { return base_.in_domain(theta); }

double LeftCensoredLogNormal::log_likelihood(const Dataset& data, const Vector& theta) const {
  if (!in_domain(theta)) return kNegInf;
  const Vector mv = base_.to_mean_variance(theta);
  const double mu = mv(0), sd = std::sqrt(mv(1));
  const double log_norm = -0.5 * std::log(2.0 * M_PI * mv(1));
  double ll = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const double z = data.y(i);
    if (!(z > 0.0)) return kNegInf;
    const double u = (std::log(z) - mu) / sd;
    if (!data.censored() || data.observed[static_cast<std::size_t>(i)] == 1)
      ll += log_norm - std::log(z) - 0.5 * u * u;
    else
      ll += stats::log_normal_cdf(u);
  }
  return ll;
}

double LeftCensoredLogNormal::augmented_log_likelihood(const Dataset& data, const Vector& theta,
                                                       const CensoringDistribution& g) const {
  double ll = log_likelihood(data, theta);
  for (Index i = 0; i < data.size(); ++i) {
    const bool observed = !data.censored() || data.observed[static_cast<std::size_t>(i)] == 1;
    const double term = observed ? g.cdf(data.y(i)) : g.mass_at(data.y(i));
    ll += term > 0.0 ? std::log(term) : kNegInf;
  }
  return ll;
}

Dataset LeftCensoredLogNormal::simulate(const Vector& theta, Index n, Rng& rng) const {
  const Vector mv = base_.to_mean_variance(theta);
  std::normal_distribution<double> norm(mv(0), std::sqrt(mv(1)));
  Dataset d;
  d.response.resize(n, 1);
  d.observed.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double y = std::exp(norm(rng));
    const double c = censoring_.sample(rng);
    d.response(i, 0) = std::max(y, c);
    d.observed[static_cast<std::size_t>(i)] = y >= c ? 1 : 0;
  }
  return d;
}

MleResult LeftCensoredLogNormal::maximize(const Dataset& data) const {
  // Optimize over (mu, log v) and map back.
  const LeftCensoredLogNormal work(LogNormalParametrization::mean_log_variance, CensoringDistribution::none());
  double sum = 0.0, sum_sq = 0.0;
  Index n_obs = 0;
  for (Index i = 0; i < data.size(); ++i) {
    const double l = std::log(data.y(i));
    sum += l;
    sum_sq += l * l;
    if (!data.censored() || data.observed[static_cast<std::size_t>(i)] == 1) ++n_obs;
  }
  MleResult r;
  const double n = static_cast<double>(data.size());
  const double mu0 = sum / n;
  const double v0 = std::max(sum_sq / n - mu0 * mu0, 1e-4);
  if (n_obs == 0 || !std::isfinite(mu0)) {
    r.theta = base_.from_mean_variance(Vector{{mu0, v0}});
    r.log_likelihood = kNegInf;
    r.interior = r.converged = false;
    return r;
  }
  if (n_obs == data.size()) {  // nothing censored: closed form
    const LogNormalModel plain(base_.parametrization());
    return plain.maximize(data);
  }
  const auto f = [&](const Vector& t) { return work.log_likelihood(data, t); };
  optim::NewtonOptions opts;
  opts.max_iterations = 100;
  opts.gradient_tolerance = 1e-7;
  auto res = optim::newton_maximize(
      f, [&](const Vector& t) { return optim::fd_gradient(f, t); },
      [&](const Vector& t) { return optim::fd_hessian(f, t); }, Vector{{mu0, std::log(v0)}}, opts);
  if (!res.converged) {
    optim::NelderMeadOptions nm;
    nm.max_evaluations = 4000;
    nm.tolerance = 1e-13;
    const auto alt = optim::nelder_mead_maximize(f, res.value > f(Vector{{mu0, std::log(v0)}}) ? res.x : Vector{{mu0, std::log(v0)}}, nm);
    if (alt.value >= res.value) res = alt;
    res.converged = std::isfinite(res.value);
  }
  r.theta = base_.from_mean_variance(Vector{{res.x(0), std::exp(res.x(1))}});
  r.log_likelihood = res.value;
  r.converged = res.converged && std::isfinite(res.value);
  r.interior = r.converged && res.x(1) > -30.0;
  return r;
}

}  // namespace imvar
