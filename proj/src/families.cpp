#include "imvar/families.hpp"
#include "imvar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace imvar {

namespace {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_diagonal(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

std::vector<Vector> draw_gaussian(const Vector& mean, const Matrix& factor, int K, Rng& rng) {
  if (K < 1) throw Error(ErrorCode::config, "sample size K must be at least 1");
  std::normal_distribution<double> norm;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(K));
  Vector z(mean.size());
  for (int k = 0; k < K; ++k) {
    for (Index i = 0; i < z.size(); ++i) z(i) = norm(rng);
    out.push_back(mean + factor * z);
  }
  return out;
}

}  // namespace

EigenPairs symmetric_eigen(const Matrix& information) {
  const Index d = information.rows();
  if (information.cols() != d || d == 0) throw Error(ErrorCode::config, "information must be a nonempty square matrix");
  EigenPairs e;
  if (is_diagonal(information)) {
    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return information(a, a) > information(b, b); });
    e.vectors = Matrix::Zero(d, d);
    e.values.resize(d);
    for (Index s = 0; s < d; ++s) {
      e.vectors(order[static_cast<std::size_t>(s)], s) = 1.0;
      e.values(s) = information(order[static_cast<std::size_t>(s)], order[static_cast<std::size_t>(s)]);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(information));
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::numerical, "eigen-decomposition failed");
    // Eigen returns ascending order.
    e.values = solver.eigenvalues().reverse();
    e.vectors = solver.eigenvectors().rowwise().reverse();
    for (Index s = 0; s < d; ++s) {
      for (Index i = 0; i < d; ++i) {
        if (e.vectors(i, s) != 0.0) {
          if (e.vectors(i, s) < 0.0) e.vectors.col(s) *= -1.0;
          break;
        }
      }
    }
  }
  if (!e.values.allFinite() || (e.values.array() <= 0.0).any())
    throw Error(ErrorCode::singular_information, "information has a nonpositive eigenvalue");
  return e;
}

double gaussian_possibility(double quadratic_form, Index d) {
  return stats::chisq_sf(std::max(quadratic_form, 0.0), static_cast<double>(d));
}

// ------------------------------------------------------------ scalar family

GaussianScalarFamily::GaussianScalarFamily(Vector mean, Matrix information, double xi)
    : mean_(std::move(mean)), information_(symmetrize(information)), xi_(xi) {
  if (information_.rows() != mean_.size() || information_.cols() != mean_.size())
    throw Error(ErrorCode::config, "Gaussian family: mean and information dimensions differ");
  Eigen::LLT<Matrix> llt(information_);
  if (!information_.allFinite() || llt.info() != Eigen::Success)
    throw Error(ErrorCode::singular_information, "Gaussian family: information is not positive definite");
  chol_l_ = llt.matrixL();
}

GaussianScalarFamily GaussianScalarFamily::with_xi(double xi) const {
  GaussianScalarFamily f = *this;
  f.xi_ = xi;
  return f;
}

Matrix GaussianScalarFamily::precision() const { return information_ / (xi_ * xi_); }

Matrix GaussianScalarFamily::covariance() const {
  return symmetrize(xi_ * xi_ * information_.llt().solve(Matrix::Identity(dimension(), dimension())));
}

double GaussianScalarFamily::quadratic_form(const Vector& theta) const {
  const Vector diff = theta - mean_;
  return diff.dot(information_ * diff) / (xi_ * xi_);
}

std::vector<Vector> GaussianScalarFamily::sample(int K, Rng& rng) const {
  if (!(xi_ > 0.0) || !std::isfinite(xi_)) throw Error(ErrorCode::numerical, "Gaussian family: xi must be positive");
  // theta = mean + xi L^{-T} z has covariance xi^2 J^{-1}.
  const Matrix factor =
      xi_ * chol_l_.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(dimension(), dimension()));
  return draw_gaussian(mean_, factor, K, rng);
}

double GaussianScalarFamily::contour(const Vector& theta) const {
  if (!(xi_ > 0.0)) throw Error(ErrorCode::numerical, "Gaussian family: xi must be positive");
  return gaussian_possibility(quadratic_form(theta), dimension());
}

PossibilityContour GaussianScalarFamily::to_contour() const {
  const GaussianScalarFamily self = *this;
  PossibilityContour c(ContourKind::closed_form_gaussian, dimension(),
                       [self](const Vector& theta, std::uint64_t) { return self.contour(theta); });
  c.gaussian = GaussianForm{mean_, precision()};
  c.anchor = Anchor{mean_, covariance()};
  return c;
}

// ------------------------------------------------------------ vector family

GaussianVectorFamily::GaussianVectorFamily(Vector mean, Matrix information, Vector xi)
    : mean_(std::move(mean)), information_(symmetrize(information)), eigen_(symmetric_eigen(information_)), xi_(std::move(xi)) {
  if (information_.rows() != mean_.size() || xi_.size() != mean_.size())
    throw Error(ErrorCode::config, "Gaussian family: mean, information and xi dimensions differ");
}

GaussianVectorFamily::GaussianVectorFamily(Vector mean, Matrix information)
    : GaussianVectorFamily(mean, information, Vector::Ones(mean.size())) {}

GaussianVectorFamily GaussianVectorFamily::with_xi(Vector xi) const {
  if (xi.size() != dimension()) throw Error(ErrorCode::config, "Gaussian family: xi has the wrong length");
  GaussianVectorFamily f = *this;
  f.xi_ = std::move(xi);
  return f;
}

void GaussianVectorFamily::require_valid() const {
  if (!xi_.allFinite() || (xi_.array() <= 0.0).any())
    throw Error(ErrorCode::numerical, "Gaussian family: every xi_s must be positive");
}

Matrix GaussianVectorFamily::precision() const {
  const Vector scaled = eigen_.values.array() / xi_.array().square();
  return symmetrize(eigen_.vectors * scaled.asDiagonal() * eigen_.vectors.transpose());
}

Matrix GaussianVectorFamily::covariance() const {
  const Vector scaled = xi_.array().square() / eigen_.values.array();
  return symmetrize(eigen_.vectors * scaled.asDiagonal() * eigen_.vectors.transpose());
}

double GaussianVectorFamily::quadratic_form(const Vector& theta) const {
  // Sum over s of psi_s (u_s'(theta - mean))^2 / xi_s^2.
  const Vector proj = eigen_.vectors.transpose() * (theta - mean_);
  return (eigen_.values.array() * proj.array().square() / xi_.array().square()).sum();
}

std::vector<Vector> GaussianVectorFamily::sample(int K, Rng& rng) const {
  require_valid();
  const Vector scale = xi_.array() / eigen_.values.array().sqrt();
  return draw_gaussian(mean_, eigen_.vectors * scale.asDiagonal(), K, rng);
}

double GaussianVectorFamily::contour(const Vector& theta) const {
  require_valid();
  return gaussian_possibility(quadratic_form(theta), dimension());
}

PossibilityContour GaussianVectorFamily::to_contour() const {
  require_valid();
  const GaussianVectorFamily self = *this;
  PossibilityContour c(ContourKind::closed_form_gaussian, dimension(),
                       [self](const Vector& theta, std::uint64_t) { return self.contour(theta); });
  c.gaussian = GaussianForm{mean_, precision()};
  c.anchor = Anchor{mean_, covariance()};
  return c;
}

bool GaussianVectorFamily::in_credible_ellipsoid(double alpha, const Vector& theta) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::config, "alpha must lie in (0, 1)");
  return quadratic_form(theta) <= stats::chisq_quantile(1.0 - alpha, static_cast<double>(dimension()));
}

std::vector<Vector> GaussianVectorFamily::boundary_points(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::config, "alpha must lie in (0, 1)");
  const double q = stats::chisq_quantile(1.0 - alpha, static_cast<double>(dimension()));
  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(2 * dimension()));
  for (Index s = 0; s < dimension(); ++s) {
    const double r = xi_(s) * std::sqrt(q / eigen_.values(s));
    points.push_back(mean_ + r * eigen_.vectors.col(s));
    points.push_back(mean_ - r * eigen_.vectors.col(s));
  }
  return points;
}

// --------------------------------------------------------------- Dirichlet

DirichletFamily::DirichletFamily(Vector mean, double n, double xi) : mean_(std::move(mean)), n_(n), xi_(xi) {
  if (mean_.size() < 2 || (mean_.array() <= 0.0).any() || std::abs(mean_.sum() - 1.0) > 1e-10)
    throw Error(ErrorCode::degenerate_mle, "Dirichlet family: mean must lie in the open simplex");
  if (!(n_ > 0.0)) throw Error(ErrorCode::config, "Dirichlet family: n must be positive");
}

DirichletFamily DirichletFamily::with_xi(double xi) const {
  DirichletFamily f = *this;
  f.xi_ = xi;
  return f;
}

std::vector<Vector> DirichletFamily::sample(int K, Rng& rng) const {
  if (K < 1) throw Error(ErrorCode::config, "sample size K must be at least 1");
  if (!(xi_ > 0.0) || !std::isfinite(xi_)) throw Error(ErrorCode::numerical, "Dirichlet family: xi must be positive");
  const Vector a = parameters();
  std::vector<std::gamma_distribution<double>> gammas;
  for (Index k = 0; k < a.size(); ++k) gammas.emplace_back(a(k), 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(K));
  for (int j = 0; j < K; ++j) {
    Vector g(a.size());
    for (Index k = 0; k < a.size(); ++k) g(k) = gammas[static_cast<std::size_t>(k)](rng);
    const double total = g.sum();
    // Tiny parameters can underflow every gamma draw; fall back to the mean.
    out.push_back(total > 0.0 ? Vector(g / total) : mean_);
  }
  return out;
}

double DirichletFamily::log_density(const Vector& theta) const {
  const double inf = std::numeric_limits<double>::infinity();
  if (theta.size() != dimension() || (theta.array() <= 0.0).any() || std::abs(theta.sum() - 1.0) > 1e-10) return -inf;
  const Vector a = parameters();
  double ld = stats::lgamma(a.sum());
  for (Index k = 0; k < a.size(); ++k) ld += (a(k) - 1.0) * std::log(theta(k)) - stats::lgamma(a(k));
  return ld;
}

double DirichletFamily::contour(const Vector& theta, int M, Rng& rng) const {
  const double target = log_density(theta);
  if (!std::isfinite(target)) return 0.0;
  int hits = 0;
  for (const Vector& draw : sample(M, rng))
    if (log_density(draw) <= target + kTieTolerance) ++hits;
  return static_cast<double>(hits) / static_cast<double>(M);
}

PossibilityContour DirichletFamily::to_contour(int M, std::uint64_t seed) const {
  const DirichletFamily self = *this;
  PossibilityContour c(
      ContourKind::dirichlet_mc, dimension(),
      [self, M](const Vector& theta, std::uint64_t stream) {
        Rng rng = make_rng(stream);
        return self.contour(theta, M, rng);
      },
      ContourMeta{M, seed});
  c.domain = [](const Vector& theta) { return satisfies(Domain::simplex, theta); };
  return c;
}

}  // namespace imvar
