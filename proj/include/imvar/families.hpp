#pragma once

#include "imvar/contour.hpp"

#include <vector>

namespace imvar {

/// Eigen-pairs of a symmetric positive-definite matrix, eigenvalues
/// descending, each eigenvector signed so its first nonzero entry is
/// positive. Diagonal input keeps the coordinate axes (stable order on ties).
struct EigenPairs {
  Matrix vectors;  // columns u_s
  Vector values;   // psi_s
};

/// Throws singular-information on a nonpositive eigenvalue.
EigenPairs symmetric_eigen(const Matrix& information);

/// 1 - G_d(q): closed-form Gaussian possibility at quadratic form q.
double gaussian_possibility(double quadratic_form, Index d);

/// N(mean, xi^2 J^{-1}).
class GaussianScalarFamily {
 public:
  GaussianScalarFamily(Vector mean, Matrix information, double xi = 1.0);

  const Vector& mean() const { return mean_; }
  const Matrix& information() const { return information_; }
  double xi() const { return xi_; }
  Index dimension() const { return mean_.size(); }

  GaussianScalarFamily with_xi(double xi) const;
  Matrix precision() const;
  Matrix covariance() const;
  double quadratic_form(const Vector& theta) const;

  std::vector<Vector> sample(int K, Rng& rng) const;
  double contour(const Vector& theta) const;
  PossibilityContour to_contour() const;

 private:
  Vector mean_;
  Matrix information_;
  Matrix chol_l_;  // J = L L'
  double xi_;
};

/// N(mean, J(xi)^{-1}) with J(xi) = U diag(1/xi) Psi diag(1/xi) U'.
class GaussianVectorFamily {
 public:
  GaussianVectorFamily(Vector mean, Matrix information, Vector xi);
  /// xi = 1 for every coordinate.
  GaussianVectorFamily(Vector mean, Matrix information);

  const Vector& mean() const { return mean_; }
  const Matrix& information() const { return information_; }
  const EigenPairs& eigen() const { return eigen_; }
  const Vector& xi() const { return xi_; }
  Index dimension() const { return mean_.size(); }

  GaussianVectorFamily with_xi(Vector xi) const;
  Matrix precision() const;
  Matrix covariance() const;
  double quadratic_form(const Vector& theta) const;

  std::vector<Vector> sample(int K, Rng& rng) const;
  double contour(const Vector& theta) const;
  PossibilityContour to_contour() const;

  /// (theta - mean)' J(xi) (theta - mean) <= chi2_d(1 - alpha).
  bool in_credible_ellipsoid(double alpha, const Vector& theta) const;

  /// mean +/- xi_s {chi2_d(1 - alpha) / psi_s}^{1/2} u_s, ordered
  /// (s=1,+), (s=1,-), (s=2,+), ...; each point lies on the ellipsoid.
  std::vector<Vector> boundary_points(double alpha) const;

 private:
  void require_valid() const;

  Vector mean_;
  Matrix information_;
  EigenPairs eigen_;
  Vector xi_;
};

/// Dirichlet(n xi m) on the simplex, with m the observed proportions.
class DirichletFamily {
 public:
  DirichletFamily(Vector mean, double n, double xi = 1.0);

  const Vector& mean() const { return mean_; }
  double n() const { return n_; }
  double xi() const { return xi_; }
  double precision() const { return n_ * xi_; }
  Vector parameters() const { return precision() * mean_; }
  Index dimension() const { return mean_.size(); }

  DirichletFamily with_xi(double xi) const;
  std::vector<Vector> sample(int K, Rng& rng) const;
  /// -inf off the open simplex.
  double log_density(const Vector& theta) const;
  /// Q{q(Theta) <= q(theta)} by M draws; 0 off the open simplex.
  double contour(const Vector& theta, int M, Rng& rng) const;
  PossibilityContour to_contour(int M, std::uint64_t seed = 0) const;

 private:
  Vector mean_;
  double n_;
  double xi_;
};

}  // namespace imvar
