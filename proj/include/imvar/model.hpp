#pragma once

#include "imvar/core.hpp"
#include "imvar/random.hpp"

#include <memory>
#include <string_view>

namespace imvar {

/// Supremum of the likelihood for one dataset. `theta` may sit on the
/// boundary of the parameter space (interior == false); the log-likelihood
/// value is still the supremum.
struct MleResult {
  Vector theta;
  double log_likelihood = 0.0;
  bool interior = true;
  bool converged = true;
};

/// A parametric statistical model. Implementations are immutable after
/// construction, so one instance can be shared by concurrent evaluators.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string_view name() const = 0;
  virtual Index dimension() const = 0;
  virtual Domain domain() const { return Domain::unconstrained; }
  virtual bool in_domain(const Vector& theta) const;

  virtual double log_likelihood(const Dataset& data, const Vector& theta) const = 0;
  virtual Dataset simulate(const Vector& theta, Index n, Rng& rng) const = 0;
  virtual MleResult maximize(const Dataset& data) const = 0;

  /// Score vector. The default uses central differences of the
  /// log-likelihood.
  virtual Vector score(const Dataset& data, const Vector& theta) const;
  virtual bool has_analytic_score() const { return false; }

  /// Observed information (negative Hessian). The default differentiates
  /// the score with step 1e-5 * (1 + |theta_i|), or takes second
  /// differences of the log-likelihood when no analytic score exists.
  virtual Matrix information(const Dataset& data, const Vector& theta) const;
};

using ModelPtr = std::shared_ptr<const Model>;

/// Finite-difference information regardless of analytic overrides.
Matrix fd_information(const Model& model, const Dataset& data, const Vector& theta);

struct RelativeLikelihood {
  double value = 0.0;
  bool domain_violation = false;
};

/// L(theta) / sup L, evaluated on the log scale.
RelativeLikelihood relative_likelihood(const Model& model, const Dataset& data, const Vector& theta);

/// Same, with the supremum precomputed.
RelativeLikelihood relative_likelihood(const Model& model, const Dataset& data, const Vector& theta,
                                       double sup_log_likelihood);

struct MleInformation {
  Vector theta;
  Matrix information;
  double log_likelihood = 0.0;
};

/// Interior MLE with its observed information. Throws degenerate-mle for
/// boundary or non-convergent fits and singular-information when the
/// information is not positive definite.
MleInformation mle_and_information(const Model& model, const Dataset& data);

}  // namespace imvar
