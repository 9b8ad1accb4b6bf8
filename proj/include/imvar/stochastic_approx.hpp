#pragma once

#include "imvar/families.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace imvar {

/// w_t = scale / (offset + t).
struct StepSchedule {
  double scale = 2.0;
  double offset = 1.0;

  double operator()(int t) const { return scale / (offset + static_cast<double>(t)); }
};

struct SAConfig {
  double alpha = 0.1;
  StepSchedule step;
  int K = 200;    // outer draws from Q per iteration
  int M = 500;    // inner Monte Carlo datasets per contour evaluation
  double epsilon = 0.005;
  int min_iterations = 5;
  int max_iterations = 500;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool log_progress = false;

  /// Throws ErrorCode::config on out-of-range fields.
  void validate() const;
};

enum class Termination { converged, max_iterations };

std::string_view to_string(Termination reason);

struct TraceEntry {
  int t = 0;
  Vector xi;
  Vector objective;
};

struct FitTrace {
  std::vector<TraceEntry> entries;
  Vector xi_hat;
  Termination reason = Termination::max_iterations;
  long evaluations = 0;  // contour evaluations
  long failures = 0;     // contour evaluations that threw

  int iterations() const { return static_cast<int>(entries.size()); }
};

/// Lower clamp applied to every xi coordinate.
inline constexpr double kMinXi = 1e-6;

/// Noisy objective evaluated at iterate xi^(t) during iteration t.
using SAObjective = std::function<Vector(const Vector& xi, int t)>;

/// xi^(t+1) = xi^(t) + sign * w_{t+1} * objective(xi^(t)), clamped at
/// kMinXi. Stops once max_s |xi^(t+1) - xi^(t)| < epsilon and at least
/// min_iterations updates have run, or at max_iterations.
FitTrace robbins_monro(const SAObjective& objective, const SAConfig& config, double sign, Vector xi0);

/// (1/K) sum 1{pi(Theta_k) > alpha} - (1 - alpha). Draw k is evaluated with
/// stream stream_seed(seed, {t, k}); an evaluation that throws counts as
/// outside the cut and increments `failures`.
double f_hat(const std::vector<Vector>& draws, const PossibilityContour& contour, double alpha, std::uint64_t seed,
             int t, unsigned workers, long* failures = nullptr);

struct ScalarFit {
  GaussianScalarFamily family;
  FitTrace trace;
};

struct VectorFit {
  GaussianVectorFamily family;
  FitTrace trace;
};

struct DirichletFit {
  DirichletFamily family;
  FitTrace trace;
};

/// Algorithm 1 from a given anchor (mean, information).
ScalarFit fit_scalar(const GaussianScalarFamily& start, const PossibilityContour& contour, const SAConfig& config);
/// Algorithm 1 anchored at the model's MLE and observed information.
ScalarFit fit_scalar(const Model& model, const Dataset& data, const PossibilityContour& contour, const SAConfig& config);

/// Algorithm 2: matches the contour at the 2d boundary points to alpha.
VectorFit fit_vector(const GaussianVectorFamily& start, const PossibilityContour& contour, const SAConfig& config);
VectorFit fit_vector(const Model& model, const Dataset& data, const PossibilityContour& contour, const SAConfig& config);

/// Algorithm 1 with the Dirichlet family.
DirichletFit fit_dirichlet(const DirichletFamily& start, const PossibilityContour& contour, const SAConfig& config);

}  // namespace imvar
