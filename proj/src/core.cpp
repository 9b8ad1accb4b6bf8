#include "imvar/core.hpp"
#include "imvar/parallel.hpp"
#include "imvar/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace imvar {

bool satisfies(Domain domain, const Vector& theta) {
  if (!theta.allFinite()) return false;
  switch (domain) {
    case Domain::unconstrained:
      return true;
    case Domain::unit_interval:
      return (theta.array() >= 0.0).all() && (theta.array() <= 1.0).all();
    case Domain::positive_orthant:
      return (theta.array() > 0.0).all();
    case Domain::simplex:
      return (theta.array() >= 0.0).all() && std::abs(theta.sum() - 1.0) <= 1e-12;
  }
  return false;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return "config";
    case ErrorCode::degenerate_mle: return "degenerate-mle";
    case ErrorCode::singular_information: return "singular-information";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::no_complement: return "no-complement";
    case ErrorCode::unbounded_loss: return "unbounded-loss";
    case ErrorCode::numerical: return "numerical";
  }
  return "unknown";
}

void Dataset::validate() const {
  const Index n = size();
  if (covariates.size() > 0 && covariates.rows() != n)
    throw Error(ErrorCode::config, "covariate rows do not match the number of responses");
  if (!observed.empty() && static_cast<Index>(observed.size()) != n)
    throw Error(ErrorCode::config, "censor flags do not match the number of responses");
  for (int flag : observed)
    if (flag != 0 && flag != 1) throw Error(ErrorCode::config, "censor flags must be 0 or 1");
}

Dataset Dataset::from_values(const std::vector<double>& values) {
  Dataset d;
  d.response = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
  return d;
}

unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t nthreads = std::min<std::size_t>(workers, count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t w = 0; w < nthreads; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(count);
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace stats {

double chisq_cdf(double x, double dof) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::cdf(boost::math::chi_squared_distribution<double>(dof), x);
}

double chisq_sf(double x, double dof) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

double chisq_quantile(double p, double dof) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

double log_normal_cdf(double z) {
  if (z > -35.0) return std::log(normal_cdf(z));
  // Asymptotic series for the Mills ratio keeps precision far in the tail.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) + 105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }
double lgamma(double x) { return boost::math::lgamma(x); }

}  // namespace stats
}  // namespace imvar
