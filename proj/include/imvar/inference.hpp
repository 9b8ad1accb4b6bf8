#pragma once

#include "imvar/contour.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace imvar {

/// A subset of the parameter space.
class Hypothesis {
 public:
  enum class Kind { box, half_space, finite_set, predicate, union_of };
  using Predicate = std::function<bool(const Vector&)>;

  /// Closed box lo <= theta <= hi; bounds may be infinite and lo_i == hi_i
  /// pins a coordinate.
  static Hypothesis box(Vector lo, Vector hi);
  static Hypothesis whole(Index d);
  /// a'theta > b.
  static Hypothesis half_space(Vector a, double b);
  static Hypothesis finite_set(std::vector<Vector> points);
  /// `complement`, when given, must decide membership in the complement.
  static Hypothesis predicate(Index d, Predicate contains, Predicate complement = {});
  static Hypothesis union_of(Index d, std::vector<Hypothesis> parts);

  Kind kind() const { return kind_; }
  Index dimension() const { return dimension_; }
  bool contains(const Vector& theta) const;
  bool is_whole() const;
  bool has_complement() const;
  /// Throws no-complement for predicates without a complement.
  Hypothesis complement() const;

  /// Nearest member in the Euclidean sense for boxes and half-spaces;
  /// identity otherwise.
  Vector project(const Vector& theta) const;

  const Vector& lower() const { return lo_; }
  const Vector& upper() const { return hi_; }
  const Vector& normal() const { return a_; }
  double offset() const { return b_; }
  const std::vector<Vector>& points() const { return points_; }
  const std::vector<Hypothesis>& parts() const { return parts_; }

 private:
  Kind kind_ = Kind::box;
  Index dimension_ = 0;
  Vector lo_, hi_, a_;
  double b_ = 0.0;
  std::vector<Vector> points_;
  Predicate contains_, complement_;
  std::vector<Hypothesis> parts_;
};

/// Budget for approximate suprema over parameter subsets.
struct SearchBudget {
  int candidates = 2000;
  int refinement_steps = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct UpperProbability {
  double value = 0.0;
  bool exact = false;         // closed-form or enumerated
  bool empty_search = false;  // no candidate found inside H
  long evaluations = 0;
  Vector argmax;
  SearchBudget budget;
};

/// sup over H of the contour.
UpperProbability upper_probability(const PossibilityContour& contour, const Hypothesis& h,
                                   const SearchBudget& budget = {});

/// 1 - upper_probability(complement of H).
double lower_probability(const PossibilityContour& contour, const Hypothesis& h, const SearchBudget& budget = {});

/// phi = g(theta). Linear maps set `matrix` (phi = A theta + b).
struct Feature {
  Index output_dimension = 1;
  std::function<Vector(const Vector&)> map;
  std::optional<Matrix> matrix;
  Vector shift;

  static Feature linear(Matrix a, Vector b = {});
  static Feature coordinate(Index d, Index i);
  static Feature identity(Index d);
  static Feature nonlinear(Index output_dimension, std::function<Vector(const Vector&)> g);

  Vector operator()(const Vector& theta) const { return map(theta); }
};

/// Marginal contour on a phi grid. For a closed-form Gaussian contour and
/// linear g the value is 1 - G_k{(phi - g(c))' (A J^{-1} A')^{-1} (phi - g(c))}
/// with k = dim(phi). Otherwise the fiber sup is searched, and nodes where
/// the fiber cannot be reached are flagged in `domain_violation`.
ContourGrid marginal_contour(const PossibilityContour& contour, const Feature& g, const std::vector<AxisSpec>& phi_axes,
                             const SearchBudget& budget = {});

/// Loss for the Choquet upper expectation: either a function or the
/// indicator of a hypothesis.
struct ChoquetSpec {
  std::function<double(const Vector&)> loss;
  std::optional<Hypothesis> indicator;
  int levels = 200;
  SearchBudget budget;
  double overflow_guard = 1e300;
};

struct ChoquetResult {
  double value = 0.0;
  int levels = 0;
  long evaluations = 0;
};

/// Midpoint rule over s in (0, 1) of sup{loss(theta) : pi(theta) > s}.
ChoquetResult choquet_upper_expectation(const PossibilityContour& contour, const ChoquetSpec& spec);

}  // namespace imvar
