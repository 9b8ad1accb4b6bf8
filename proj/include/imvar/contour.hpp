#pragma once

#include "imvar/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace imvar {

enum class ContourKind {
  exact_discrete,
  monte_carlo,
  closed_form_gaussian,
  dirichlet_mc,
  profile,
  bootstrap,
  censored_plugin,
};

std::string_view to_string(ContourKind kind);

/// How R(X, theta) == R(x, theta) is counted. Inclusive is the default.
enum class TieRule { inclusive, strict };

/// log R values within this distance count as ties.
inline constexpr double kTieTolerance = 1e-12;

struct ContourMeta {
  int monte_carlo_size = 0;  // M, or B for bootstrap contours
  std::uint64_t seed = 0;
};

/// pi(theta) = 1 - G_d{(theta - center)' precision (theta - center)}.
struct GaussianForm {
  Vector center;
  Matrix precision;
};

/// Gaussian used to propose candidate points when searching the parameter
/// space (typically the MLE and inverse information).
struct Anchor {
  Vector center;
  Matrix covariance;
};

/// A possibility contour theta -> [0, 1]. Monte Carlo contours draw their
/// randomness from the `stream` seed, so a fixed stream gives common random
/// numbers across theta.
class PossibilityContour {
 public:
  using Evaluator = std::function<double(const Vector& theta, std::uint64_t stream)>;
  using DomainCheck = std::function<bool(const Vector& theta)>;

  PossibilityContour(ContourKind kind, Index dimension, Evaluator evaluator, ContourMeta meta = {});

  /// Value clamped to [0, 1]; 0 outside the domain or on NaN.
  double operator()(const Vector& theta, std::uint64_t stream = 0) const;
  bool in_domain(const Vector& theta) const;

  ContourKind kind() const { return kind_; }
  Index dimension() const { return dimension_; }
  const ContourMeta& meta() const { return meta_; }

  std::optional<GaussianForm> gaussian;
  std::optional<Anchor> anchor;
  DomainCheck domain;

 private:
  ContourKind kind_;
  Index dimension_;
  Evaluator evaluator_;
  ContourMeta meta_;
};

/// Enumeration contour for s_obs successes in n Bernoulli trials.
double exact_binomial_contour(Index n, Index s_obs, double theta, TieRule tie = TieRule::inclusive);
PossibilityContour make_exact_binomial_contour(Index n, Index s_obs, TieRule tie = TieRule::inclusive);

/// Naive Monte Carlo contour (1/M) sum_m 1{R(X_m, theta) <= R(x, theta)}
/// with X_m simulated at theta. A simulated dataset whose likelihood cannot
/// be maximized counts as a tie.
double mc_contour(const Model& model, const Dataset& data, const Vector& theta, int M, Rng& rng,
                  TieRule tie = TieRule::inclusive);

/// Same with the observed supremum precomputed.
double mc_contour(const Model& model, const Dataset& data, double sup_log_likelihood, const Vector& theta, int M,
                  Rng& rng, TieRule tie = TieRule::inclusive);

/// Wraps mc_contour. The anchor is set when the MLE is interior with a
/// positive-definite information.
PossibilityContour make_mc_contour(ModelPtr model, Dataset data, int M, std::uint64_t seed = 0,
                                   ContourKind kind = ContourKind::monte_carlo, TieRule tie = TieRule::inclusive);

struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  Index count = 1;

  double node(Index i) const;
  double spacing() const;
};

/// Values on a rectangular grid; nodes are stored row-major (the last axis
/// varies fastest).
struct ContourGrid {
  std::vector<AxisSpec> axes;
  std::vector<double> values;
  std::vector<std::uint8_t> domain_violation;

  Index dimension() const { return static_cast<Index>(axes.size()); }
  std::size_t size() const { return values.size(); }
  Vector node(std::size_t index) const;
  static std::size_t node_count(const std::vector<AxisSpec>& axes);
};

/// Evaluates the contour at every node. Node i uses stream
/// stream_seed(master_seed, {i}), so the result does not depend on `workers`.
ContourGrid grid_eval(const PossibilityContour& contour, const std::vector<AxisSpec>& axes, unsigned workers,
                      std::uint64_t master_seed = 0);

/// Indices of nodes with value > alpha.
std::vector<std::size_t> alpha_cut(const ContourGrid& grid, double alpha);

/// Riemann sum of |a - b| times the node cell volume.
double l1_distance(const ContourGrid& a, const ContourGrid& b);

}  // namespace imvar
