#include "mobs/types.hpp"

#include <cmath>
#include <string>

#include "mobs/errors.hpp"

namespace mobs {

void validate(const Hyperparams& hp) {
    if (hp.k < 1) throw InvalidArgument("hyperparams: k must be >= 1");
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidArgument(std::string("hyperparams: ") + name +
                                  " must be positive and finite");
    };
    pos(hp.alpha, "alpha");
    pos(hp.a, "a");
    pos(hp.b, "b");
    pos(hp.q, "q");
    pos(hp.tau_omega, "tau_omega");
    pos(hp.tau_mu, "tau_mu");
    pos(hp.tau_sigma, "tau_sigma");
    if (!std::isfinite(hp.mu0)) throw InvalidArgument("hyperparams: mu0 must be finite");
    double ksum = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (!(hp.kappa[i] >= 0.0) || !std::isfinite(hp.kappa[i]))
            throw InvalidArgument("hyperparams: kappa entries must be finite and >= 0");
        ksum += hp.kappa[i];
    }
    if (std::abs(ksum - 1.0) > 1e-8)
        throw InvalidArgument("hyperparams: kappa must sum to 1");
    if (!(hp.kappa[0] > 0.0))
        throw InvalidArgument("hyperparams: kappa[0] must be positive");
}

void validate(const MixtureDraw& draw) {
    const Eigen::Index k = draw.weights.size();
    if (k == 0) throw InvalidArgument("draw: no components");
    if (draw.means.size() != k || draw.variances.size() != k)
        throw InvalidArgument("draw: component vectors disagree in size");
    if (!draw.weights.allFinite() || !draw.means.allFinite() || !draw.variances.allFinite())
        throw InvalidArgument("draw: non-finite component parameters");
    if ((draw.weights.array() < 0.0).any())
        throw InvalidArgument("draw: negative weight");
    if (std::abs(draw.weights.sum() - 1.0) > 1e-8)
        throw InvalidArgument("draw: weights do not sum to 1");
    if (!(draw.variances.array() > 0.0).all())
        throw InvalidArgument("draw: variances must be positive");
    for (Eigen::Index i = 0; i < draw.allocations.size(); ++i) {
        const int c = draw.allocations[i];
        if (c < 1 || c > k)
            throw InvalidArgument("draw: allocation " + std::to_string(i) +
                                  " outside 1.." + std::to_string(k));
    }
}

void validate(const Dataset& data) {
    const Eigen::Index n = data.y.size();
    if (n == 0) throw InvalidArgument("dataset: empty response");
    if (!data.y.allFinite()) throw InvalidArgument("dataset: non-finite response values");
    if (data.x.rows() != n)
        throw InvalidArgument("dataset: x has " + std::to_string(data.x.rows()) +
                              " rows for " + std::to_string(n) + " responses");
    if (data.levels.size() != data.x.cols())
        throw InvalidArgument("dataset: levels size does not match predictor count");
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
        const int d = data.levels[j];
        if (d < 2 || d > 255)
            throw InvalidArgument("dataset: column " + std::to_string(j + 1) +
                                  " must have between 2 and 255 levels");
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::uint8_t c = data.x(i, j);
            if (c != kMissingCode && c >= d)
                throw InvalidArgument("dataset: code " + std::to_string(int(c)) +
                                      " out of range in column " + std::to_string(j + 1));
        }
    }
}

void validate(const HypothesisProbs& probs) {
    const double vals[4] = {probs.p0, probs.p11, probs.p12, probs.p13};
    for (double v : vals)
        if (!(v >= 0.0) || !(v <= 1.0) || !std::isfinite(v))
            throw InvalidArgument("hypothesis probs: entries must lie in [0, 1]");
    if (std::abs(probs.sum() - 1.0) > 1e-10)
        throw InvalidArgument("hypothesis probs: entries must sum to 1");
}

}  // namespace mobs
