#include "imvar/inference.hpp"
#include "imvar/optimize.hpp"
#include "imvar/parallel.hpp"
#include "imvar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace imvar {

// ---------------------------------------------------------------- hypotheses

Hypothesis Hypothesis::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw Error(ErrorCode::config, "box bounds differ in length");
  if ((lo.array() > hi.array()).any()) throw Error(ErrorCode::config, "box lower bound exceeds upper bound");
  Hypothesis h;
  h.kind_ = Kind::box;
  h.dimension_ = lo.size();
  h.lo_ = std::move(lo);
  h.hi_ = std::move(hi);
  return h;
}

Hypothesis Hypothesis::whole(Index d) {
  const double inf = std::numeric_limits<double>::infinity();
  return box(Vector::Constant(d, -inf), Vector::Constant(d, inf));
}

Hypothesis Hypothesis::half_space(Vector a, double b) {
  if (a.size() == 0 || a.norm() == 0.0) throw Error(ErrorCode::config, "half-space normal must be nonzero");
  Hypothesis h;
  h.kind_ = Kind::half_space;
  h.dimension_ = a.size();
  h.a_ = std::move(a);
  h.b_ = b;
  return h;
}

Hypothesis Hypothesis::finite_set(std::vector<Vector> points) {
  if (points.empty()) throw Error(ErrorCode::config, "finite set must be nonempty");
  Hypothesis h;
  h.kind_ = Kind::finite_set;
  h.dimension_ = points.front().size();
  for (const auto& p : points)
    if (p.size() != h.dimension_) throw Error(ErrorCode::config, "finite-set points differ in dimension");
  h.points_ = std::move(points);
  return h;
}

Hypothesis Hypothesis::predicate(Index d, Predicate contains, Predicate complement) {
  if (!contains) throw Error(ErrorCode::config, "predicate hypothesis needs a membership function");
  Hypothesis h;
  h.kind_ = Kind::predicate;
  h.dimension_ = d;
  h.contains_ = std::move(contains);
  h.complement_ = std::move(complement);
  return h;
}

Hypothesis Hypothesis::union_of(Index d, std::vector<Hypothesis> parts) {
  for (const auto& p : parts)
    if (p.dimension() != d) throw Error(ErrorCode::config, "union parts differ in dimension");
  Hypothesis h;
  h.kind_ = Kind::union_of;
  h.dimension_ = d;
  h.parts_ = std::move(parts);
  return h;
}

bool Hypothesis::contains(const Vector& theta) const {
  if (theta.size() != dimension_) return false;
  switch (kind_) {
    case Kind::box: return (theta.array() >= lo_.array()).all() && (theta.array() <= hi_.array()).all();
    case Kind::half_space: return a_.dot(theta) > b_;
    case Kind::finite_set:
      return std::any_of(points_.begin(), points_.end(), [&](const Vector& p) { return p == theta; });
    case Kind::predicate: return contains_(theta);
    case Kind::union_of:
      return std::any_of(parts_.begin(), parts_.end(), [&](const Hypothesis& p) { return p.contains(theta); });
  }
  return false;
}

bool Hypothesis::is_whole() const {
  return kind_ == Kind::box && lo_.array().isInf().all() && hi_.array().isInf().all();
}

bool Hypothesis::has_complement() const { return kind_ != Kind::predicate || static_cast<bool>(complement_); }

Hypothesis Hypothesis::complement() const {
  switch (kind_) {
    case Kind::box: {
      // Outside the box: some coordinate below lo_i or above hi_i.
      std::vector<Hypothesis> parts;
      for (Index i = 0; i < dimension_; ++i) {
        const Vector e = Vector::Unit(dimension_, i);
        if (std::isfinite(lo_(i))) parts.push_back(half_space(-e, -lo_(i)));
        if (std::isfinite(hi_(i))) parts.push_back(half_space(e, hi_(i)));
      }
      return union_of(dimension_, std::move(parts));
    }
    case Kind::half_space: return half_space(-a_, -b_);  // shares the boundary hyperplane
    case Kind::finite_set: {
      const Hypothesis self = *this;
      return predicate(
          dimension_, [self](const Vector& t) { return !self.contains(t); },
          [self](const Vector& t) { return self.contains(t); });
    }
    case Kind::predicate:
      if (!complement_) throw Error(ErrorCode::no_complement, "predicate hypothesis has no complement");
      return predicate(dimension_, complement_, contains_);
    case Kind::union_of: {
      const Hypothesis self = *this;
      return predicate(
          dimension_, [self](const Vector& t) { return !self.contains(t); },
          [self](const Vector& t) { return self.contains(t); });
    }
  }
  return *this;
}

Vector Hypothesis::project(const Vector& theta) const {
  if (kind_ == Kind::box) return theta.cwiseMax(lo_).cwiseMin(hi_);
  if (kind_ == Kind::half_space) {
    const double gap = b_ - a_.dot(theta);
    if (gap < 0.0) return theta;
    // Step just past the hyperplane so the strict inequality holds.
    const double margin = 1e-10 * (1.0 + std::abs(b_));
    return theta + (gap + margin) / a_.squaredNorm() * a_;
  }
  return theta;
}

// ------------------------------------------------------------ search helpers

namespace {

constexpr std::uint64_t kCrnTag = 0x5eedULL;

struct Proposal {
  Vector center;
  Matrix factor;  // covariance = factor * factor'
};

Matrix covariance_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(0.5 * (cov + cov.transpose()));
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov + cov.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

std::optional<Proposal> proposal_for(const PossibilityContour& contour) {
  if (contour.anchor) return Proposal{contour.anchor->center, covariance_factor(contour.anchor->covariance)};
  if (contour.gaussian) {
    const Matrix cov = contour.gaussian->precision.inverse();
    return Proposal{contour.gaussian->center, covariance_factor(cov)};
  }
  return std::nullopt;
}

std::vector<Vector> search_candidates(const PossibilityContour& contour, const Hypothesis& h,
                                      const SearchBudget& budget) {
  std::vector<Vector> out;
  auto keep = [&](const Vector& raw) {
    const Vector p = h.project(raw);
    if (p.allFinite() && h.contains(p) && contour.in_domain(p)) out.push_back(p);
  };
  Rng rng = make_rng(stream_seed(budget.seed, {1}));
  std::normal_distribution<double> norm;
  const auto prop = proposal_for(contour);
  if (prop) {
    keep(prop->center);
    static constexpr double kInflations[] = {0.5, 1.0, 2.0, 4.0};
    const int per = std::max(1, budget.candidates / 4);
    Vector z(prop->center.size());
    for (double s : kInflations) {
      for (int k = 0; k < per; ++k) {
        for (Index i = 0; i < z.size(); ++i) z(i) = norm(rng);
        keep(prop->center + s * (prop->factor * z));
      }
    }
  } else if (h.kind() == Hypothesis::Kind::box && h.lower().allFinite() && h.upper().allFinite()) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector u(h.dimension());
    for (int k = 0; k < budget.candidates; ++k) {
      for (Index i = 0; i < u.size(); ++i) u(i) = h.lower()(i) + (h.upper()(i) - h.lower()(i)) * unif(rng);
      keep(u);
    }
  }
  return out;
}

UpperProbability search_upper(const PossibilityContour& contour, const Hypothesis& h, const SearchBudget& budget) {
  UpperProbability r;
  r.budget = budget;
  const auto candidates = search_candidates(contour, h, budget);
  if (candidates.empty()) {
    r.empty_search = true;
    return r;
  }
  const std::uint64_t crn = stream_seed(budget.seed, {kCrnTag});
  std::vector<double> values(candidates.size(), 0.0);
  parallel_for(candidates.size(), budget.workers, [&](std::size_t k) { values[k] = contour(candidates[k], crn); });
  r.evaluations = static_cast<long>(candidates.size());
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  r.value = values[best];
  r.argmax = candidates[best];
  if (budget.refinement_steps > 0 && r.value < 1.0) {
    auto objective = [&](const Vector& theta) {
      const Vector p = h.project(theta);
      if (!h.contains(p) || !contour.in_domain(p)) return -1.0;
      ++r.evaluations;
      return contour(p, crn);
    };
    optim::NelderMeadOptions nm;
    nm.max_evaluations = budget.refinement_steps;
    if (const auto prop = proposal_for(contour)) nm.initial_steps = 0.5 * prop->factor.rowwise().norm();
    const auto refined = optim::nelder_mead_maximize(objective, r.argmax, nm);
    if (refined.value > r.value) {
      r.value = refined.value;
      r.argmax = h.project(refined.x);
    }
  }
  return r;
}

/// Minimizes (theta - c)' P (theta - c) over a box by coordinate descent.
Vector box_quadratic_minimizer(const Vector& c, const Matrix& p, const Vector& lo, const Vector& hi) {
  Vector theta = c.cwiseMax(lo).cwiseMin(hi);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      const double rest = p.row(i).dot(theta - c) - p(i, i) * (theta(i) - c(i));
      const double next = std::clamp(c(i) - rest / p(i, i), lo(i), hi(i));
      change = std::max(change, std::abs(next - theta(i)));
      theta(i) = next;
    }
    if (change <= 1e-15 * (1.0 + theta.cwiseAbs().maxCoeff())) break;
  }
  return theta;
}

}  // namespace

UpperProbability upper_probability(const PossibilityContour& contour, const Hypothesis& h, const SearchBudget& budget) {
  if (h.dimension() != contour.dimension()) throw Error(ErrorCode::config, "hypothesis dimension does not match the contour");
  UpperProbability r;
  r.budget = budget;
  const std::uint64_t crn = stream_seed(budget.seed, {kCrnTag});
  switch (h.kind()) {
    case Hypothesis::Kind::union_of: {
      r.exact = true;
      for (const auto& part : h.parts()) {
        const UpperProbability sub = upper_probability(contour, part, budget);
        r.evaluations += sub.evaluations;
        r.exact = r.exact && sub.exact;
        if (!sub.empty_search && (r.argmax.size() == 0 || sub.value > r.value)) {
          r.value = sub.value;
          r.argmax = sub.argmax;
        }
      }
      r.empty_search = !h.parts().empty() && r.argmax.size() == 0;
      return r;
    }
    case Hypothesis::Kind::finite_set: {
      r.exact = true;
      for (const auto& p : h.points()) {
        const double v = contour(p, crn);
        ++r.evaluations;
        if (r.argmax.size() == 0 || v > r.value) {
          r.value = v;
          r.argmax = p;
        }
      }
      return r;
    }
    case Hypothesis::Kind::box:
      if (contour.gaussian) {
        r.argmax = box_quadratic_minimizer(contour.gaussian->center, contour.gaussian->precision, h.lower(), h.upper());
        r.value = contour(r.argmax, crn);
        r.exact = true;
        r.evaluations = 1;
        return r;
      }
      break;
    case Hypothesis::Kind::half_space:
      if (contour.gaussian) {
        const Vector& c = contour.gaussian->center;
        const double gap = h.offset() - h.normal().dot(c);
        if (gap < 0.0) {
          r.argmax = c;
        } else {
          // Closest point of the hyperplane in the precision metric.
          const Vector sa = contour.gaussian->precision.ldlt().solve(h.normal());
          r.argmax = c + gap / h.normal().dot(sa) * sa;
        }
        r.value = contour(r.argmax, crn);
        r.exact = true;
        r.evaluations = 1;
        return r;
      }
      break;
    case Hypothesis::Kind::predicate: break;
  }
  return search_upper(contour, h, budget);
}

double lower_probability(const PossibilityContour& contour, const Hypothesis& h, const SearchBudget& budget) {
  return 1.0 - upper_probability(contour, h.complement(), budget).value;
}

// ------------------------------------------------------------------ marginal

Feature Feature::linear(Matrix a, Vector b) {
  if (b.size() == 0) b = Vector::Zero(a.rows());
  if (b.size() != a.rows()) throw Error(ErrorCode::config, "feature offset has the wrong length");
  Feature f;
  f.output_dimension = a.rows();
  f.map = [a, b](const Vector& theta) -> Vector { return a * theta + b; };
  f.matrix = std::move(a);
  f.shift = std::move(b);
  return f;
}

Feature Feature::coordinate(Index d, Index i) {
  if (i < 0 || i >= d) throw Error(ErrorCode::config, "feature coordinate out of range");
  return linear(Matrix(Vector::Unit(d, i).transpose()));
}

Feature Feature::identity(Index d) { return linear(Matrix::Identity(d, d)); }

Feature Feature::nonlinear(Index output_dimension, std::function<Vector(const Vector&)> g) {
  Feature f;
  f.output_dimension = output_dimension;
  f.map = std::move(g);
  return f;
}

namespace {

Matrix feature_jacobian(const Feature& g, const Vector& theta) {
  Matrix jac(g.output_dimension, theta.size());
  Vector tp = theta, tm = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(theta(i)));
    tp(i) = theta(i) + h;
    tm(i) = theta(i) - h;
    jac.col(i) = (g(tp) - g(tm)) / (2.0 * h);
    tp(i) = tm(i) = theta(i);
  }
  return jac;
}

/// Gauss-Newton projection onto {g(theta) = phi}; nullopt when it stalls.
std::optional<Vector> project_fiber(const Feature& g, const Vector& phi, Vector theta) {
  for (int it = 0; it < 60; ++it) {
    const Vector r = g(theta) - phi;
    if (!r.allFinite()) return std::nullopt;
    if (r.cwiseAbs().maxCoeff() <= 1e-8) return theta;
    const Matrix jac = feature_jacobian(g, theta);
    const Matrix jjt = jac * jac.transpose();
    Eigen::LDLT<Matrix> ldlt(jjt);
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    theta -= jac.transpose() * ldlt.solve(r);
  }
  return std::nullopt;
}

struct FiberSearch {
  double value = 0.0;
  bool feasible = false;
};

FiberSearch search_fiber(const PossibilityContour& contour, const Feature& g, const Vector& phi,
                         const SearchBudget& budget) {
  const std::uint64_t crn = stream_seed(budget.seed, {kCrnTag});
  const auto prop = proposal_for(contour);
  const Index d = contour.dimension();
  const Vector center = prop ? prop->center : Vector::Zero(d);
  const Matrix cov = prop ? Matrix(prop->factor * prop->factor.transpose()) : Matrix::Identity(d, d);
  FiberSearch result;

  if (g.matrix) {
    const Matrix& a = *g.matrix;
    // Fiber point closest to the anchor in its metric, then free directions.
    const Matrix sat = cov * a.transpose();
    const Vector theta0 = center + sat * (a * sat).ldlt().solve(phi - g(center));
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const Index rank = svd.rank();
    const Matrix null = svd.matrixV().rightCols(d - rank);
    if (!(g(theta0) - phi).allFinite() || (g(theta0) - phi).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + phi.cwiseAbs().maxCoeff()))
      return result;
    result.feasible = true;
    result.value = contour(theta0, crn);
    if (null.cols() == 0 || budget.refinement_steps <= 0) return result;
    auto objective = [&](const Vector& z) {
      const Vector theta = theta0 + null * z;
      return contour.in_domain(theta) ? contour(theta, crn) : -1.0;
    };
    optim::NelderMeadOptions nm;
    nm.max_evaluations = budget.refinement_steps;
    nm.initial_steps = 0.5 * (null.transpose() * cov * null).diagonal().cwiseSqrt();
    const auto refined = optim::nelder_mead_maximize(objective, Vector::Zero(null.cols()), nm);
    result.value = std::max(result.value, refined.value);
    return result;
  }

  const auto start = project_fiber(g, phi, center);
  if (!start) return result;
  result.feasible = true;
  result.value = contour(*start, crn);
  if (budget.refinement_steps <= 0) return result;
  auto objective = [&](const Vector& theta) {
    const auto p = project_fiber(g, phi, theta);
    if (!p || !contour.in_domain(*p)) return -1.0;
    return contour(*p, crn);
  };
  optim::NelderMeadOptions nm;
  nm.max_evaluations = budget.refinement_steps;
  nm.initial_steps = 0.5 * cov.diagonal().cwiseSqrt();
  const auto refined = optim::nelder_mead_maximize(objective, *start, nm);
  result.value = std::max(result.value, refined.value);
  return result;
}

}  // namespace

ContourGrid marginal_contour(const PossibilityContour& contour, const Feature& g, const std::vector<AxisSpec>& phi_axes,
                             const SearchBudget& budget) {
  if (static_cast<Index>(phi_axes.size()) != g.output_dimension)
    throw Error(ErrorCode::config, "phi grid dimension does not match the feature");
  ContourGrid grid;
  grid.axes = phi_axes;
  const std::size_t total = ContourGrid::node_count(phi_axes);
  grid.values.assign(total, 0.0);
  grid.domain_violation.assign(total, 0);

  if (contour.gaussian && g.matrix) {
    const Matrix& a = *g.matrix;
    const Matrix cov = contour.gaussian->precision.ldlt().solve(Matrix::Identity(contour.dimension(), contour.dimension()));
    const Matrix v = a * cov * a.transpose();
    Eigen::LDLT<Matrix> ldlt(0.5 * (v + v.transpose()));
    const Vector center = g(contour.gaussian->center);
    for (std::size_t i = 0; i < total; ++i) {
      const Vector diff = grid.node(i) - center;
      grid.values[i] = stats::chisq_sf(std::max(0.0, diff.dot(ldlt.solve(diff))), static_cast<double>(a.rows()));
    }
    return grid;
  }

  parallel_for(total, budget.workers, [&](std::size_t i) {
    SearchBudget inner = budget;
    inner.workers = 1;
    const FiberSearch f = search_fiber(contour, g, grid.node(i), inner);
    grid.values[i] = f.feasible ? std::clamp(f.value, 0.0, 1.0) : 0.0;
    grid.domain_violation[i] = f.feasible ? 0 : 1;
  });
  return grid;
}

// ------------------------------------------------------------------- Choquet

namespace {

void guard(double value, double limit) {
  if (!std::isfinite(value) || std::abs(value) > limit)
    throw Error(ErrorCode::unbounded_loss, "loss supremum exceeds the overflow guard");
}

}  // namespace

ChoquetResult choquet_upper_expectation(const PossibilityContour& contour, const ChoquetSpec& spec) {
  if (spec.levels < 2) throw Error(ErrorCode::config, "Choquet integral needs at least two levels");
  if (!spec.loss && !spec.indicator) throw Error(ErrorCode::config, "Choquet integral needs a loss");
  ChoquetResult result;
  result.levels = spec.levels;
  const double width = 1.0 / spec.levels;
  auto level = [&](int j) { return (j + 0.5) * width; };

  if (spec.indicator) {
    // sup of an indicator over {pi > s} is 1 exactly when s < upper probability.
    const UpperProbability up = upper_probability(contour, *spec.indicator, spec.budget);
    result.evaluations = up.evaluations;
    int count = 0;
    for (int j = 0; j < spec.levels; ++j)
      if (level(j) < up.value) ++count;
    result.value = count * width;
    return result;
  }

  const auto& loss = spec.loss;
  Rng rng = make_rng(stream_seed(spec.budget.seed, {2}));
  std::normal_distribution<double> norm;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index d = contour.dimension();
  double total = 0.0;

  if (contour.gaussian) {
    // Level sets are ellipsoids {q < chi2_d(1 - s)}; search in whitened ball
    // coordinates theta = c + A u with A' P A = I.
    const Vector& c = contour.gaussian->center;
    Eigen::LLT<Matrix> llt(contour.gaussian->precision);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::singular_information, "Gaussian contour precision is not positive definite");
    const Matrix a = llt.matrixU().solve(Matrix::Identity(d, d));
    std::vector<Vector> unit;
    const int n = std::max(2, spec.budget.candidates);
    for (int k = 0; k < n; ++k) {
      Vector z(d);
      for (Index i = 0; i < d; ++i) z(i) = norm(rng);
      z /= z.norm();
      // Half on the sphere, half spread through the ball.
      if (k % 2 == 1) z *= std::pow(unif(rng), 1.0 / static_cast<double>(d));
      unit.push_back(z);
    }
    std::vector<double> sups(static_cast<std::size_t>(spec.levels), 0.0);
    std::vector<long> evals(static_cast<std::size_t>(spec.levels), 0);
    parallel_for(static_cast<std::size_t>(spec.levels), spec.budget.workers, [&](std::size_t j) {
      const double radius = std::sqrt(stats::chisq_quantile(1.0 - level(static_cast<int>(j)), static_cast<double>(d)));
      double best = loss(c);
      Vector best_u = Vector::Zero(d);
      long count = 1;
      for (const auto& u : unit) {
        const double v = loss(c + a * (radius * u));
        ++count;
        if (v > best) {
          best = v;
          best_u = radius * u;
        }
      }
      if (spec.budget.refinement_steps > 0) {
        auto objective = [&](const Vector& u) {
          const double norm_u = u.norm();
          const Vector inside = norm_u > radius ? Vector(u * (radius / norm_u)) : u;
          ++count;
          return loss(c + a * inside);
        };
        optim::NelderMeadOptions nm;
        nm.max_evaluations = spec.budget.refinement_steps;
        nm.initial_steps = Vector::Constant(d, 0.1 * radius);
        const auto refined = optim::nelder_mead_maximize(objective, best_u, nm);
        best = std::max(best, refined.value);
      }
      sups[j] = best;
      evals[j] = count;
    });
    for (std::size_t j = 0; j < sups.size(); ++j) {
      guard(sups[j], spec.overflow_guard);
      total += sups[j];
      result.evaluations += evals[j];
    }
    result.value = total * width;
    return result;
  }

  // General contours: one candidate cloud with common random numbers, then
  // the sup at each level runs over cloud points inside the level set.
  const Hypothesis everywhere = Hypothesis::whole(d);
  auto cloud = search_candidates(contour, everywhere, spec.budget);
  if (cloud.empty()) throw Error(ErrorCode::numerical, "Choquet integral: no candidate points (contour has no anchor)");
  const std::uint64_t crn = stream_seed(spec.budget.seed, {kCrnTag});
  std::vector<double> pi(cloud.size()), ell(cloud.size());
  parallel_for(cloud.size(), spec.budget.workers, [&](std::size_t k) {
    pi[k] = contour(cloud[k], crn);
    ell[k] = loss(cloud[k]);
  });
  result.evaluations = static_cast<long>(cloud.size());
  for (int j = 0; j < spec.levels; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cloud.size(); ++k)
      if (pi[k] > level(j)) best = std::max(best, ell[k]);
    // Above the best observed possibility the anchor centre stands in.
    if (!std::isfinite(best) && best < 0) best = ell.front();
    guard(best, spec.overflow_guard);
    total += best;
  }
  result.value = total * width;
  return result;
}

}  // namespace imvar
