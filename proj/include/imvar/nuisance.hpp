#pragma once

#include "imvar/families.hpp"
#include "imvar/models.hpp"

#include <functional>
#include <vector>

namespace imvar {

// ------------------------------------------------------------ profile IM

/// Interest parameter phi = g(theta) with the nuisance profiled out.
struct ProfileSpec {
  ModelPtr model;
  std::function<double(const Vector&)> interest;
  std::function<Vector(const Vector&)> interest_gradient;
  /// sup over {g(theta) = phi} of the log-likelihood, with its argmax.
  std::function<MleResult(const Dataset&, double phi)> constrained_mle;
  /// Moves a fiber point by delta in the fiber chart (stays on the fiber).
  std::function<Vector(const Vector& theta, double delta)> fiber_move;
  std::function<bool(double phi)> phi_in_domain;
  int probes = 5;
};

/// Gamma (shape, scale) with interest the mean phi = shape * scale. The
/// fiber chart is log-shape.
ProfileSpec gamma_mean_profile(int probes = 5);

/// sup_{g = phi} L / sup L.
double relative_profile_likelihood(const ProfileSpec& spec, const Dataset& data, double phi);

struct ProfileContourValue {
  double value = 0.0;
  double spread = 0.0;  // max - min over the probes
  std::vector<double> probe_values;
};

/// Max over fiber probes (constrained MLE, then +/-0.5 and +/-1 fiber
/// standard deviations) of P_theta{R(X, phi) <= R(x, phi)}, M datasets each.
ProfileContourValue profile_contour(const ProfileSpec& spec, const Dataset& data, double phi, int M, int probes,
                                    Rng& rng);

PossibilityContour make_profile_contour(const ProfileSpec& spec, Dataset data, int M, std::uint64_t seed = 0);

/// N(phi_hat, xi^2 grad' J^{-1} grad) as a one-dimensional family.
GaussianScalarFamily profile_companion(const ProfileSpec& spec, const Dataset& data);

// ------------------------------------------------------- empirical-risk IM

struct RiskSpec {
  std::function<double(double x, double theta)> loss;
  std::function<double(std::vector<double> x)> minimizer;
  int bootstrap = 500;
};

/// Check loss (1/2){|x - theta| - x + (1 - 2 tau) theta}; the minimizer is
/// the order statistic x_(ceil(n tau)).
RiskSpec quantile_risk(double tau, int bootstrap = 500);

/// Mean loss over the sample.
double empirical_risk(const RiskSpec& spec, const std::vector<double>& x, double theta);

/// Bootstrap-calibrated empirical-risk contour for one dataset. The
/// bootstrap excess risks rho*(theta_hat) - rho*(theta_hat*) are computed
/// once; pi(theta) is the fraction of them at least the observed excess
/// risk rho(theta) - rho(theta_hat).
class BootstrapRiskContour {
 public:
  BootstrapRiskContour(std::vector<double> data, RiskSpec spec, Rng& rng);

  double theta_hat() const { return theta_hat_; }
  double operator()(double theta) const;
  const std::vector<double>& bootstrap_excess() const { return excess_; }

 private:
  std::vector<double> data_;
  RiskSpec spec_;
  double theta_hat_ = 0.0;
  double risk_hat_ = 0.0;
  std::vector<double> excess_;  // ascending
};

double empirical_risk_contour(const std::vector<double>& data, const RiskSpec& spec, double theta, Rng& rng);

PossibilityContour make_bootstrap_contour(const std::vector<double>& data, const RiskSpec& spec, std::uint64_t seed);

/// Gaussian kernel density estimate with the normal-reference bandwidth
/// 1.06 sd n^{-1/5}.
double kernel_density(const std::vector<double>& x, double at);

/// N(theta_hat, xi^2 tau(1 - tau) / (n p_hat^2)).
GaussianScalarFamily quantile_companion(const std::vector<double>& data, double tau);

// --------------------------------------------------------- censored data

/// Product-limit estimate of the censoring distribution from (z_i, 1 - t_i).
/// Time runs downward because Z = max(Y, C). Mass left over sits below
/// every observation.
CensoringDistribution kaplan_meier_swapped(const Dataset& data);

double censored_contour(const LeftCensoredLogNormal& model, const Dataset& data, const Vector& theta, int M, Rng& rng);

/// Plug-in contour: estimates G by kaplan_meier_swapped, then Monte Carlo
/// over (Z, T) datasets.
PossibilityContour make_censored_contour(LogNormalParametrization parametrization, Dataset data, int M,
                                         std::uint64_t seed = 0);

}  // namespace imvar
