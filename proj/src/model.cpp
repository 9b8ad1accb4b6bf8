#include "imvar/model.hpp"
#include "imvar/optimize.hpp"

#include <cmath>
#include <limits>

namespace imvar {

bool Model::in_domain(const Vector& theta) const {
  return theta.size() == dimension() && satisfies(domain(), theta);
}

Vector Model::score(const Dataset& data, const Vector& theta) const {
  return optim::fd_gradient([&](const Vector& t) { return log_likelihood(data, t); }, theta);
}

Matrix Model::information(const Dataset& data, const Vector& theta) const {
  return fd_information(*this, data, theta);
}

Matrix fd_information(const Model& model, const Dataset& data, const Vector& theta) {
  if (model.has_analytic_score())
    return -optim::fd_jacobian([&](const Vector& t) { return model.score(data, t); }, theta, 1e-5);
  return -optim::fd_hessian([&](const Vector& t) { return model.log_likelihood(data, t); }, theta);
}

RelativeLikelihood relative_likelihood(const Model& model, const Dataset& data, const Vector& theta,
                                       double sup_log_likelihood) {
  if (!model.in_domain(theta)) return {0.0, true};
  const double ll = model.log_likelihood(data, theta);
  if (std::isnan(ll)) return {0.0, true};
  if (ll == -std::numeric_limits<double>::infinity()) return {0.0, false};
  return {std::min(1.0, std::exp(ll - sup_log_likelihood)), false};
}

RelativeLikelihood relative_likelihood(const Model& model, const Dataset& data, const Vector& theta) {
  const MleResult fit = model.maximize(data);
  if (!fit.converged || !std::isfinite(fit.log_likelihood))
    throw Error(ErrorCode::non_convergence, std::string(model.name()) + ": likelihood maximization failed");
  return relative_likelihood(model, data, theta, fit.log_likelihood);
}

MleInformation mle_and_information(const Model& model, const Dataset& data) {
  const MleResult fit = model.maximize(data);
  if (!fit.converged || !std::isfinite(fit.log_likelihood))
    throw Error(ErrorCode::degenerate_mle, std::string(model.name()) + ": maximum likelihood did not converge");
  if (!fit.interior)
    throw Error(ErrorCode::degenerate_mle, std::string(model.name()) + ": maximum likelihood estimate on the boundary");
  Matrix info = model.information(data, fit.theta);
  info = 0.5 * (info + info.transpose());
  Eigen::LLT<Matrix> llt(info);
  if (!info.allFinite() || llt.info() != Eigen::Success)
    throw Error(ErrorCode::singular_information, std::string(model.name()) + ": observed information is not positive definite");
  return {fit.theta, std::move(info), fit.log_likelihood};
}

}  // namespace imvar
