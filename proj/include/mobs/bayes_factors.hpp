#pragma once

#include <Eigen/Core>

#include "mobs/types.hpp"

namespace mobs {

// Per-cell sufficient statistics for one predictor under one mixture draw.
// Cell (h, l) collects the observations allocated to component h whose
// predictor code is l.  Everything the conditional Bayes factors need is
// (count, sum, sum of squares) per cell, so their cost is O(k * d) after one
// O(n) accumulation pass.
struct LevelSuffStats {
    Eigen::MatrixXi counts;   // k x d
    Eigen::MatrixXd sums;     // k x d
    Eigen::MatrixXd sumsqs;   // k x d
    Eigen::VectorXi component_totals;  // size k, row sums of counts
    Eigen::Index n = 0;       // total observations
};

// One pass over the data.  Codes must lie in [0, d); allocations in [1, k].
LevelSuffStats accumulate_suff_stats(const Eigen::Ref<const Eigen::VectorXd>& y,
                                     const Eigen::Ref<const Codes>& x_j,
                                     const Eigen::Ref<const Eigen::VectorXi>& allocations,
                                     int k, int d);

// log Bayes factor for "level weights differ" against the null, conditional
// on one draw's weights and allocations:
//   sum_l [ log beta(n_j(l) + tau_omega * w) - log beta(tau_omega * w) ]
//     - sum_h n_h log w_h
// where n_j(l) is the column of per-component counts at level l.  Weights
// are floored at 1e-12 and renormalized before use so a numerically zero
// weight cannot produce an infinite result.
double log_bf11(const LevelSuffStats& stats,
                const Eigen::Ref<const Eigen::VectorXd>& weights,
                const Hyperparams& hp);

// log Bayes factor for "level kernels differ" against the null, conditional
// on one draw's component means/variances.  Per-component prior on the level
// kernels: sigma2_{jh} ~ IGa(tau_sigma / sigma_h^4, tau_sigma / sigma_h^2)
// (mean sigma_h^2), mean_{jh} ~ N(mean_h, sigma2_{jh} / tau_mu).  The level
// evidence integrates in closed form; the null part needs only the pooled
// per-component statistics.  Empty cells contribute exactly zero.
double log_bf12(const LevelSuffStats& stats, const MixtureDraw& draw,
                const Hyperparams& hp);

struct LogBfTriple {
    double log_bf11 = 0.0;
    double log_bf12 = 0.0;
    double log_bf13 = 0.0;  // always the sum of the other two
};

// The "both differ" factor is exactly BF11 * BF12 because the two blocks of
// parameters are a priori independent.
LogBfTriple make_triple(double log_bf11, double log_bf12);

// Four-way posterior over hypotheses given prior mass kappa and the
// conditional Bayes factors, computed with a log-sum-exp normalization:
//   p0 : p11 : p12 : p13 =
//     kappa0 : kappa11 BF11 : kappa12 BF12 : kappa13 BF13.
// kappa entries may be zero (that hypothesis gets probability zero) but not
// all zero.
HypothesisProbs posterior_probs(const LogBfTriple& bf,
                                const Eigen::Ref<const Eigen::Vector4d>& kappa);

namespace detail {

// Kernel behind posterior_probs, taking precomputed log(kappa) (entries may
// be -inf).  The screening loops call this directly with log-kappa hoisted
// out of the draw loop; sharing one kernel keeps both paths bitwise equal.
void posterior_probs4(const double* log_kappa, double log_bf11, double log_bf12,
                      double* out);

// In-place variant of accumulate_suff_stats: reuses the matrices already
// held by `s`, so a loop over draws with fixed (k, d) performs no
// allocations after the first pass.
void accumulate_suff_stats_into(LevelSuffStats& s,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Codes>& x_j,
                                const Eigen::Ref<const Eigen::VectorXi>& allocations,
                                int k, int d);

// Everything log_bf11 derives from the draw alone: the floored and
// renormalized weights' logs, the Dirichlet concentration, and the null
// beta normalizer.  Preparing these once per draw removes the per-predictor
// lgamma calls that do not depend on the counts.
struct Bf11Terms {
    Eigen::VectorXd conc0;   // tau_omega * floored weights
    Eigen::VectorXd log_w;   // log of floored weights
    double lb0 = 0.0;        // log beta(conc0)
};

// Per-component constants for log_bf12: the inverse-gamma prior parameters,
// their log-gamma values, and the component log variances.  A component
// whose prior shape or rate overflowed is kept as-is; the evaluator throws
// only if that component is non-empty, matching the one-shot computation.
struct Bf12Terms {
    Eigen::VectorXd mu, s2, a, b, lgamma_a, log_s2;  // one entry per component
    double tau_mu = 0.0, log_tau_mu = 0.0, tau_sigma = 0.0;
};

struct DrawBfTerms {
    Bf11Terms bf11;
    Bf12Terms bf12;
};

Bf11Terms make_bf11_terms(const Eigen::Ref<const Eigen::VectorXd>& weights,
                          const Hyperparams& hp);
Bf12Terms make_bf12_terms(const MixtureDraw& draw, const Hyperparams& hp);

// Validates the draw, then prepares both term sets.
DrawBfTerms make_draw_bf_terms(const MixtureDraw& draw, const Hyperparams& hp);

// Evaluators behind the public log_bf11 / log_bf12.  The public functions
// build fresh terms per call and delegate here, so scoring many predictors
// against prepared terms stays bitwise equal to the one-shot entry points.
double log_bf11_with(const LevelSuffStats& stats, const Bf11Terms& terms);
double log_bf12_with(const LevelSuffStats& stats, const Bf12Terms& terms);

}  // namespace detail

}  // namespace mobs
