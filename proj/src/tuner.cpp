#include "mobs/tuner.hpp"

#include <cmath>

#include "mobs/errors.hpp"
#include "mobs/rng.hpp"

namespace mobs {

Hyperparams default_hyperparams(int k) {
    if (k < 1) throw InvalidArgument("default_hyperparams: k must be >= 1");
    Hyperparams hp;
    hp.k = k;
    hp.alpha = static_cast<double>(k);
    hp.tau_omega = std::pow(static_cast<double>(k), 1.5) + 8.0 * (k - 1);
    // mu0, q, a, b, tau_mu, tau_sigma, kappa keep their k-independent
    // defaults from the struct definition.
    return hp;
}

void validate(const GaussianMixture& mix) {
    const Eigen::Index k = mix.weights.size();
    if (k == 0) throw InvalidArgument("mixture: no components");
    if (mix.means.size() != k || mix.variances.size() != k)
        throw InvalidArgument("mixture: component vectors disagree in size");
    if (!mix.weights.allFinite() || !mix.means.allFinite() || !mix.variances.allFinite())
        throw InvalidArgument("mixture: non-finite parameters");
    if ((mix.weights.array() < 0.0).any())
        throw InvalidArgument("mixture: negative weight");
    if (std::abs(mix.weights.sum() - 1.0) > 1e-8)
        throw InvalidArgument("mixture: weights do not sum to 1");
    if (!(mix.variances.array() > 0.0).all())
        throw InvalidArgument("mixture: variances must be positive");
}

double gauss_l2_inner(double mu1, double var1, double mu2, double var2) {
    if (!std::isfinite(mu1) || !std::isfinite(mu2) || !(var1 > 0.0) || !(var2 > 0.0))
        throw InvalidArgument("gauss_l2_inner: requires finite means, positive variances");
    const double v = var1 + var2;
    const double d = mu1 - mu2;
    return std::exp(-0.5 * d * d / v) / std::sqrt(2.0 * M_PI * v);
}

double mixture_l2_sq(const GaussianMixture& f, const GaussianMixture& g) {
    validate(f);
    validate(g);
    const Eigen::Index kf = f.weights.size();
    const Eigen::Index kg = g.weights.size();
    double ff = 0.0, gg = 0.0, fg = 0.0;
    for (Eigen::Index i = 0; i < kf; ++i)
        for (Eigen::Index j = 0; j < kf; ++j)
            ff += f.weights[i] * f.weights[j] *
                  gauss_l2_inner(f.means[i], f.variances[i], f.means[j], f.variances[j]);
    for (Eigen::Index i = 0; i < kg; ++i)
        for (Eigen::Index j = 0; j < kg; ++j)
            gg += g.weights[i] * g.weights[j] *
                  gauss_l2_inner(g.means[i], g.variances[i], g.means[j], g.variances[j]);
    for (Eigen::Index i = 0; i < kf; ++i)
        for (Eigen::Index j = 0; j < kg; ++j)
            fg += f.weights[i] * g.weights[j] *
                  gauss_l2_inner(f.means[i], f.variances[i], g.means[j], g.variances[j]);
    // Cancellation can push a true near-zero distance slightly negative.
    return std::max(ff - 2.0 * fg + gg, 0.0);
}

SnrEstimate estimate_snr(const Hyperparams& hp, int mc_draws, std::uint64_t seed) {
    validate(hp);
    if (mc_draws < 2) throw InvalidArgument("estimate_snr: need at least 2 draws");
    const int k = hp.k;

    double sum0 = 0.0, sum1 = 0.0, sum00 = 0.0, sum11 = 0.0, sum01 = 0.0;
    GaussianMixture f_y, f_mean, f_cond;
    f_y.weights.resize(k);
    f_y.means.resize(k);
    f_y.variances.resize(k);
    f_mean = f_y;
    f_cond = f_y;
    const Eigen::VectorXd prior_conc = Eigen::VectorXd::Constant(k, hp.alpha / k);

    for (int i = 0; i < mc_draws; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));

        // Baseline mixture from its prior.
        rng.dirichlet(prior_conc, f_y.weights);
        for (int h = 0; h < k; ++h) {
            f_y.variances[h] = rng.inverse_gamma(hp.a, hp.b);
            f_y.means[h] = rng.normal(hp.mu0, std::sqrt(hp.q * f_y.variances[h]));
        }

        // Same mixture with every mean integrated back to its prior:
        // kernel h becomes N(mu0, q * sigma2_h).  The distance to it
        // measures the marginal spread the data must overcome.
        f_mean.weights = f_y.weights;
        f_mean.means.setConstant(hp.mu0);
        f_mean.variances = hp.q * f_y.variances;
        const double d0 = mixture_l2_sq(f_y, f_mean);

        // One level's conditional mixture from the alternative prior,
        // centered on the baseline draw.
        Eigen::VectorXd floored = f_y.weights.cwiseMax(1e-12);
        floored *= hp.tau_omega / floored.sum();
        rng.dirichlet(floored, f_cond.weights);
        for (int h = 0; h < k; ++h) {
            const double s2 = f_y.variances[h];
            f_cond.variances[h] = rng.inverse_gamma(hp.tau_sigma / (s2 * s2),
                                                    hp.tau_sigma / s2);
            f_cond.means[h] =
                rng.normal(f_y.means[h], std::sqrt(f_cond.variances[h] / hp.tau_mu));
        }
        const double d1 = mixture_l2_sq(f_y, f_cond);

        sum0 += d0;
        sum1 += d1;
        sum00 += d0 * d0;
        sum11 += d1 * d1;
        sum01 += d0 * d1;
    }

    const auto n = static_cast<double>(mc_draws);
    SnrEstimate est;
    est.mc_draws = mc_draws;
    est.delta0 = sum0 / n;
    est.delta1 = sum1 / n;
    if (!(est.delta0 > 0.0))
        throw NumericFailure("estimate_snr: zero marginal spread");
    est.ratio = est.delta1 / est.delta0;
    const double v0 = (sum00 - n * est.delta0 * est.delta0) / (n - 1.0);
    const double v1 = (sum11 - n * est.delta1 * est.delta1) / (n - 1.0);
    const double c01 = (sum01 - n * est.delta0 * est.delta1) / (n - 1.0);
    // Delta method for a ratio of means with correlated numerator and
    // denominator.
    const double var_ratio =
        (v1 - 2.0 * est.ratio * c01 + est.ratio * est.ratio * v0) /
        (n * est.delta0 * est.delta0);
    est.mc_stderr_ratio = std::sqrt(std::max(var_ratio, 0.0));
    return est;
}

}  // namespace mobs
