#pragma once

#include <Eigen/Core>

namespace mobs {

// Numerically careful scalar helpers shared by the samplers and the Bayes
// factor evaluations.  All functions throw InvalidArgument on non-finite or
// out-of-domain inputs unless noted otherwise.

// log(sum_i exp(v_i)) with the usual max shift; empty input is -inf.
double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& v);

// log N(t | mean, variance); requires variance > 0.
double log_gauss_pdf(double t, double mean, double variance);

// log of the multivariate beta function:
//   log beta(alpha) = sum_h lgamma(alpha_h) - lgamma(sum_h alpha_h).
// Requires all alpha_h > 0.
double log_multivariate_beta(const Eigen::Ref<const Eigen::VectorXd>& alpha);

// lgamma(a + c) - lgamma(a), stable for very large `a` where the two
// lgamma values agree to most of their digits.  Requires a > 0, a + c > 0.
double lgamma_ratio(double a, double c);

// log density at t of the mixture sum_h w_h N(mean_h, variance_h).
// Weights must be a simplex (within 1e-8), variances positive.
double mixture_log_density(double t,
                           const Eigen::Ref<const Eigen::VectorXd>& weights,
                           const Eigen::Ref<const Eigen::VectorXd>& means,
                           const Eigen::Ref<const Eigen::VectorXd>& variances);

// Posterior allocation probabilities for one observation:
//   P(c = h | y) proportional to w_h N(y | mean_h, variance_h),
// computed in log space and normalized.
Eigen::VectorXd allocation_probs(double y,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights,
                                 const Eigen::Ref<const Eigen::VectorXd>& means,
                                 const Eigen::Ref<const Eigen::VectorXd>& variances);

// log InverseGamma(x | shape, rate) = shape*log(rate) - lgamma(shape)
//   - (shape+1)*log(x) - rate/x; requires x > 0, shape > 0, rate > 0.
double log_inv_gamma_pdf(double x, double shape, double rate);

// log Dirichlet(w | conc); w must be a simplex, conc positive.
double log_dirichlet_pdf(const Eigen::Ref<const Eigen::VectorXd>& w,
                         const Eigen::Ref<const Eigen::VectorXd>& conc);

namespace detail {

// Unvalidated kernel behind allocation_probs; writes normalized
// probabilities into `out`.  Hot path for the allocation sampler.
void allocation_probs_into(double y,
                           const double* weights, const double* means,
                           const double* variances, Eigen::Index k,
                           double* out);

}  // namespace detail

}  // namespace mobs
