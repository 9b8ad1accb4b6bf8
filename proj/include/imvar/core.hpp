#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace imvar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Constraint set a model's parameter lives in.
enum class Domain { unconstrained, unit_interval, simplex, positive_orthant };

bool satisfies(Domain domain, const Vector& theta);

enum class ErrorCode {
  config,
  degenerate_mle,
  singular_information,
  non_convergence,
  no_complement,
  unbounded_loss,
  numerical,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Observed data. `response` has one row per observation (one column for
/// scalar responses, two for paired responses). `observed` carries censoring
/// flags (1 = fully observed) and is empty for uncensored models.
struct Dataset {
  Matrix response;
  Matrix covariates;
  std::vector<int> observed;

  Index size() const { return response.rows(); }
  double y(Index i) const { return response(i, 0); }
  bool censored() const { return !observed.empty(); }

  /// Throws ErrorCode::config when column lengths disagree.
  void validate() const;

  static Dataset from_values(const std::vector<double>& values);
};

}  // namespace imvar
