#pragma once

#include <cstddef>

namespace imvar::stats {

double chisq_cdf(double x, double dof);
/// Upper tail 1 - G_d(x), without cancellation.
double chisq_sf(double x, double dof);
double chisq_quantile(double p, double dof);
double normal_cdf(double z);
/// log Phi(z), accurate in the far left tail.
double log_normal_cdf(double z);
double digamma(double x);
double trigamma(double x);
double lgamma(double x);

}  // namespace imvar::stats
