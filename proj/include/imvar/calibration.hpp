#pragma once

#include "imvar/inference.hpp"
#include "imvar/nuisance.hpp"
#include "imvar/stochastic_approx.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace imvar {

enum class Method {
  exact,
  naive,
  variational_scalar,
  variational_vector,
  variational_dirichlet,
  bootstrap,
  bootstrap_variational,
  censored,
  censored_variational,
  profile,
  profile_variational,
};

std::string_view to_string(Method method);
/// Throws ErrorCode::config on an unknown name.
Method method_from_string(std::string_view name);

/// A contour built for one dataset, with the fitted xi when a variational
/// family was involved.
struct BuiltContour {
  PossibilityContour contour;
  Vector xi;
  int iterations = 0;
  std::optional<GaussianScalarFamily> scalar;
  std::optional<GaussianVectorFamily> vector;
  std::optional<DirichletFamily> dirichlet;
  FitTrace trace;
};

using ContourBuilder = std::function<BuiltContour(const Dataset& data, std::uint64_t seed)>;
using DataGenerator = std::function<Dataset(Rng& rng)>;

DataGenerator model_generator(ModelPtr model, Vector truth, Index n);

ContourBuilder exact_binomial_builder();
ContourBuilder naive_builder(ModelPtr model, int M);
/// Algorithm 1 (vector = false) or Algorithm 2 against the naive contour.
ContourBuilder variational_builder(ModelPtr model, int M, SAConfig sa, bool vector);
ContourBuilder dirichlet_builder(Index categories, int M, SAConfig sa);
ContourBuilder bootstrap_builder(RiskSpec risk);
/// Quantile companion family fitted to the bootstrap contour by Algorithm 1.
ContourBuilder bootstrap_variational_builder(RiskSpec risk, double tau, SAConfig sa);
ContourBuilder censored_builder(LogNormalParametrization parametrization, int M);
ContourBuilder censored_variational_builder(LogNormalParametrization parametrization, int M, SAConfig sa);
ContourBuilder profile_builder(ProfileSpec spec, int M);
ContourBuilder profile_variational_builder(ProfileSpec spec, int M, SAConfig sa);

struct Scenario {
  std::string name;
  DataGenerator generator;
  ContourBuilder builder;
  Vector truth;  // in the contour's coordinates
  int replications = 100;
  std::vector<double> alpha_levels{0.05, 0.1, 0.25, 0.5};
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct CalibrationReport {
  std::string name;
  int replications = 0;
  int failures = 0;
  std::vector<double> values;  // contour at the truth, ascending
  std::vector<double> alpha_levels;
  std::vector<double> cdf;
  std::vector<double> timings;  // seconds per replication, contour build + evaluation
  std::vector<Vector> xi;       // per successful replication, when fitted
  std::optional<double> mean_l1;

  /// Fraction of values <= alpha.
  double cdf_at(double alpha) const;
};

/// Replicates: simulate, build, evaluate at the truth. Replication r uses
/// streams derived from (seed, r), so the report does not depend on
/// `workers`. More than 5% failed replications is an error.
CalibrationReport validity_study(const Scenario& scenario);

struct HypothesisCurve {
  std::vector<double> upper;  // Pi(H) per replication, ascending
  std::vector<double> cdf;    // at the scenario's alpha levels
};

struct HypothesisReport {
  std::vector<double> alpha_levels;
  std::vector<HypothesisCurve> curves;
  int failures = 0;
};

/// CDF of the upper probability of each hypothesis across replications.
/// Every hypothesis must hold at the truth.
HypothesisReport hypothesis_calibration(const Scenario& scenario, const std::vector<Hypothesis>& hypotheses,
                                        const SearchBudget& budget = {});

struct TimingReport {
  double relative_time = 0.0;  // reference time / approximation time
  double mean_l1 = 0.0;
  std::vector<double> l1;
  std::vector<double> reference_seconds;
  std::vector<double> approximation_seconds;
};

/// Both methods build a contour on the same dataset and evaluate it on the
/// same grid; wall time covers build plus grid evaluation.
TimingReport timing_accuracy_study(const DataGenerator& generator, const ContourBuilder& reference,
                                   const ContourBuilder& approximation, const std::vector<AxisSpec>& axes,
                                   int replications, std::uint64_t seed, unsigned workers = 1);

/// Intercept plus p seeded N(0, 1) covariate columns, each shifted to mean
/// zero and scaled to mean square one.
Matrix scaled_poisson_design(Index n, Index p, std::uint64_t seed);

/// Upper bound CDF(alpha) may reach under validity: alpha + 2 sqrt(alpha(1-alpha)/R).
double validity_bound(double alpha, int replications);

}  // namespace imvar
