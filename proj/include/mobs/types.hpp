#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace mobs {

// Code for a missing category in predictor matrices.
inline constexpr std::uint8_t kMissingCode = 255;

// Column of categorical codes for one predictor (values 0..d-1, or
// kMissingCode).
using Codes = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

// Categorical predictor matrix, n rows by p columns, column-major so one
// predictor is contiguous.
using CodeMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Fixed hyperparameters of the baseline mixture prior and of the per-
// predictor conditional priors.  Defaults are the recommended values for
// k = 3 components; default_hyperparams(k) produces them for any k.
struct Hyperparams {
    int k = 3;                  // mixture components in the baseline fit

    // Baseline mixture prior: w ~ Dirichlet(alpha/k, ..., alpha/k),
    // sigma2_h ~ InverseGamma(a, b), mu_h | sigma2_h ~ N(mu0, q * sigma2_h).
    double alpha = 3.0;
    double a = 2.0;
    double b = 0.02;
    double mu0 = 0.0;
    double q = 50.0;

    // Concentration scales of the conditional priors.
    double tau_omega = 21.196152422706632;  // level weights (k=3 default)
    double tau_mu = 50.0;                   // level means
    double tau_sigma = 50.0;                // level variances

    // Prior hypothesis weights (null, weights-only, kernels-only, both);
    // the starting point of the empirical-Bayes fixed point.
    Eigen::Vector4d kappa{0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
};

void validate(const Hyperparams& hp);

// One retained state of the baseline sampler.
struct MixtureDraw {
    Eigen::VectorXd weights;     // size k, simplex
    Eigen::VectorXd means;       // size k
    Eigen::VectorXd variances;   // size k, positive
    Eigen::VectorXi allocations; // size n, values in 1..k
};

// Checks sizes, simplex property (1e-8 tolerance), positive variances, and
// allocation range.
void validate(const MixtureDraw& draw);

// Response vector plus categorical predictors.
struct Dataset {
    Eigen::VectorXd y;       // size n, all finite
    CodeMatrix x;            // n rows, p columns
    Eigen::VectorXi levels;  // size p, d_j >= 2

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return x.cols(); }
};

// Checks row/column agreement, level counts >= 2, and that every code is
// either below its column's level count or kMissingCode.
void validate(const Dataset& data);

// Posterior probabilities of the four per-predictor hypotheses:
// null, weights-change, kernels-change, both-change.
struct HypothesisProbs {
    double p0 = 1.0;
    double p11 = 0.0;
    double p12 = 0.0;
    double p13 = 0.0;

    double sum() const { return p0 + p11 + p12 + p13; }
};

// All entries in [0,1] and summing to 1 within 1e-10.
void validate(const HypothesisProbs& probs);

}  // namespace mobs
