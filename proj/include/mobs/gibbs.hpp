#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mobs/rng.hpp"
#include "mobs/types.hpp"

namespace mobs {

// Configuration of one baseline Gibbs run.  Retained draws are the states at
// iterations burn_in + m * thin for m = 1..keep, so the defaults keep the
// final 500 states of a 6000-iteration run.
struct ChainConfig {
    int total_iters = 6000;
    int burn_in = 5500;
    int keep = 500;
    int thin = 1;
    std::uint64_t seed = 0;
};

// Requires total_iters >= 1, burn_in >= 0, keep >= 1, thin >= 1, and
// burn_in + keep * thin <= total_iters.
void validate(const ChainConfig& cfg);

struct ChainOutput {
    std::vector<MixtureDraw> draws;       // size cfg.keep
    std::vector<double> log_joint_trace;  // one entry per iteration
};

// Full conditional updates (one Gibbs scan = allocations, then component
// parameters, then weights).  Each is exposed for direct testing.

// c_i ~ Categorical over h with probability proportional to
// w_h N(y_i | mean_h, variance_h); returns 1-based labels.
Eigen::VectorXi sample_allocations(const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const MixtureDraw& draw, Rng& rng);

// Conjugate normal-inverse-gamma update per component given allocations:
// sigma2_h ~ IGa(a + n_h/2, b + [centered sum of squares + shrinkage term]/2)
// then mean_h ~ N(posterior mean, q_h * sigma2_h) with
// q_h = 1 / (1/q + n_h).  Components with no members draw from the prior.
// Returns (means, variances); draws are made in component order, variance
// before mean, so the stream layout is fixed.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_components(
    const Eigen::Ref<const Eigen::VectorXd>& y,
    const Eigen::Ref<const Eigen::VectorXi>& allocations,
    const Hyperparams& hp, Rng& rng);

// w ~ Dirichlet(alpha/k + n_1, ..., alpha/k + n_k).
Eigen::VectorXd sample_weights(const Eigen::Ref<const Eigen::VectorXi>& allocations,
                               const Hyperparams& hp, Rng& rng);

// log p(y, c, w, mean, variance) under the baseline model; used as the
// per-iteration trace statistic.
double log_joint_density(const Eigen::Ref<const Eigen::VectorXd>& y,
                         const MixtureDraw& draw, const Hyperparams& hp);

// Deterministic initial state: y is quantile-binned into k groups (ties
// broken by index), component means/variances are the group moments with
// variances floored at 1e-6 * var(y) (absolute floor 1e-12), weights
// uniform.
MixtureDraw initial_draw(const Eigen::Ref<const Eigen::VectorXd>& y, int k);

// Runs the sampler.  Throws NumericFailure naming the iteration if any
// state coordinate becomes non-finite.
ChainOutput run_chain(const Eigen::Ref<const Eigen::VectorXd>& y,
                      const Hyperparams& hp, const ChainConfig& cfg);

}  // namespace mobs
