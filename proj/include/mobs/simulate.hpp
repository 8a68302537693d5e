#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mobs/types.hpp"

namespace mobs {

// Benchmark generator.  Six models: {1,2} linear response, {3,4} squared
// linear response, {5,6} a 64-configuration Gaussian lookup over six random
// predictors.  Even-numbered models draw the predictor matrix with one
// correlated block dichotomized at per-column medians; odd ones are i.i.d.
// Bernoulli(1/2).  Either way the screener sees binary codes.
struct SimSpec {
    int model = 1;  // 1..6
    Eigen::Index n = 200;
    Eigen::Index p = 2000;
    bool correlated = false;       // must be true for models 2, 4, 6
    double rho = 0.5;              // shared-factor strength, in (0, 1)
    Eigen::Index block_size = 600; // correlated block width
    // The correlated construction replaces a fraction of the latent matrix
    // with shared-factor values.  Default: every row of the block gets the
    // factor structure.  literal_rows instead restricts it to the first
    // ceil(rho * n) rows, leaving the rest i.i.d.
    bool literal_rows = false;
    std::uint64_t seed = 0;
};

void validate(const SimSpec& spec);

struct SimInstance {
    Dataset data;
    std::vector<Eigen::Index> truth;  // 0-based active predictor indices
};

// Independent Bernoulli(1/2) codes.
CodeMatrix gen_uncorrelated_x(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

// Latent i.i.d. N(0,1) matrix in which a random subset of `block_size`
// columns shares a common factor: selected columns become
// z_i1 + sqrt(1/rho - 1) * z_ij with z_i1 the first latent column, giving
// pairwise latent correlation rho inside the block.  Every column is then
// dichotomized at its empirical median (strictly below -> 1, else 0); the
// split is scale-free, so the latent combination needs no normalization.
CodeMatrix gen_correlated_block(Eigen::Index n, Eigen::Index p, double rho,
                                Eigen::Index block_size, std::uint64_t seed,
                                bool literal_rows = false);

// Response for a dichotomized predictor matrix.  Returns (y, truth).
// Models 1-4 use the first five predictors with weights (2, 1, -2, 1, -2)
// plus intercept 1 and N(0,1) noise; 1-2 are linear, 3-4 square the linear
// term.  Models 5-6 pick six distinct predictors at random; each of the 64
// code configurations gets its own N(mu, sigma^2) with mu ~ U(-1, 1) and
// sigma ~ U(0, 1/8).
std::pair<Eigen::VectorXd, std::vector<Eigen::Index>> gen_response(
    const CodeMatrix& x, int model, std::uint64_t seed);

// Full instance for a SimSpec: predictor matrix, response, binary levels.
SimInstance make_instance(const SimSpec& spec);

// |Pearson correlation| between y and each predictor column; larger means
// more significant (columns with any missing code, zero variance, or a
// constant y score 0).  The baseline competitor for the screener; negate
// before handing to roc_auc, whose convention is smaller = stronger.
Eigen::VectorXd marginal_corr_scores(const Dataset& data);

struct RocCurve {
    // Parallel arrays; row i gives the operating point after accepting all
    // scores <= threshold[i].  A leading (-inf threshold) row pins (0, 0).
    std::vector<double> threshold;
    std::vector<double> fpr;
    std::vector<double> tpr;
    double auc = 0.0;  // trapezoidal area
};

// Smaller score = more significant.  Tied scores enter together (one curve
// point per distinct value), which makes the trapezoidal area equal to the
// Mann-Whitney statistic with the half-tie correction.  Requires at least
// one active and one inactive index.
RocCurve roc_auc(const Eigen::Ref<const Eigen::VectorXd>& scores,
                 const std::vector<Eigen::Index>& truth);

}  // namespace mobs
