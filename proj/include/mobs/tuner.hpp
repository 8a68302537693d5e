#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "mobs/types.hpp"

namespace mobs {

// Recommended hyperparameters as a function of the component count:
// mu0 = 0, alpha = k, a = 2, b = 0.02, q = 50, tau_mu = 50, tau_sigma = 50,
// tau_omega = k^(3/2) + 8 (k - 1), kappa = (1/2, 1/6, 1/6, 1/6).
Hyperparams default_hyperparams(int k);

// A plain mixture of Gaussians (no allocations attached).
struct GaussianMixture {
    Eigen::VectorXd weights;
    Eigen::VectorXd means;
    Eigen::VectorXd variances;
};

void validate(const GaussianMixture& mix);

// integral of N(t | mu1, var1) N(t | mu2, var2) dt
//   = N(mu1 - mu2 | 0, var1 + var2).
double gauss_l2_inner(double mu1, double var1, double mu2, double var2);

// Squared L2 distance between two Gaussian mixture densities, expanded into
// pairwise gauss_l2_inner terms and clamped at zero against cancellation.
double mixture_l2_sq(const GaussianMixture& f, const GaussianMixture& g);

struct SnrEstimate {
    double delta0 = 0.0;          // E || f_y - f_mean ||^2 (marginal scale)
    double delta1 = 0.0;          // E || f_y - f_cond ||^2 (signal scale)
    double ratio = 0.0;           // delta1 / delta0
    double mc_stderr_ratio = 0.0; // delta-method Monte Carlo error of ratio
    int mc_draws = 0;
};

// Prior-predictive signal-to-noise ratio of the conditional model relative
// to the marginal spread, by Monte Carlo over the full prior: each draw
// samples baseline weights/kernels, then one level's conditional
// weights/kernels, and measures the two squared L2 distances.  Draw i uses
// rng substream i of `seed`, so the estimate is independent of any future
// parallelization of the loop.
SnrEstimate estimate_snr(const Hyperparams& hp, int mc_draws, std::uint64_t seed);

}  // namespace mobs
