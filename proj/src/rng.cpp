#include "mobs/rng.hpp"

#include <cmath>
#include <random>

#include "mobs/errors.hpp"

namespace mobs {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::substream(std::uint64_t master, std::uint64_t stream) {
    // Each stream index lands in a different splitmix64 trajectory; the Rng
    // constructor applies one more mix, so consecutive stream indices do not
    // yield consecutive engine seeds.
    return Rng(mix64(master) + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

double Rng::uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double Rng::uniform(double lo, double hi) {
    if (!(lo < hi)) throw InvalidArgument("uniform: requires lo < hi");
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double sd) {
    if (!(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd))
        throw InvalidArgument("normal: requires finite mean and sd > 0");
    return std::normal_distribution<double>(mean, sd)(engine_);
}

double Rng::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw InvalidArgument("gamma: requires shape > 0 and scale > 0");
    return std::gamma_distribution<double>(shape, scale)(engine_);
}

double Rng::inverse_gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw InvalidArgument("inverse_gamma: requires shape > 0 and rate > 0");
    const double g = std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
    const double v = 1.0 / g;
    if (!(v > 0.0) || !std::isfinite(v)) return 1e-300;
    return v < 1e-300 ? 1e-300 : v;
}

void Rng::dirichlet(const Eigen::Ref<const Eigen::VectorXd>& conc,
                    Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::Index k = conc.size();
    if (k == 0) throw InvalidArgument("dirichlet: empty concentration");
    if (out.size() != k) throw InvalidArgument("dirichlet: output size mismatch");
    double total = 0.0;
    for (Eigen::Index h = 0; h < k; ++h) {
        if (!(conc[h] > 0.0) || !std::isfinite(conc[h]))
            throw InvalidArgument("dirichlet: concentrations must be positive and finite");
        out[h] = std::gamma_distribution<double>(conc[h], 1.0)(engine_);
        total += out[h];
    }
    if (total > 0.0) {
        out /= total;
    } else {
        // All gamma draws underflowed (tiny concentrations); fall back to
        // the uniform point rather than returning NaN.
        out.setConstant(1.0 / static_cast<double>(k));
    }
}

Eigen::Index Rng::uniform_index(Eigen::Index size) {
    if (size < 1) throw InvalidArgument("uniform_index: size must be >= 1");
    return std::uniform_int_distribution<Eigen::Index>(0, size - 1)(engine_);
}

Eigen::Index Rng::categorical(const Eigen::Ref<const Eigen::VectorXd>& probs) {
    const Eigen::Index k = probs.size();
    if (k == 0) throw InvalidArgument("categorical: empty probability vector");
    double total = 0.0;
    for (Eigen::Index h = 0; h < k; ++h) {
        if (!(probs[h] >= 0.0) || !std::isfinite(probs[h]))
            throw InvalidArgument("categorical: probabilities must be finite and >= 0");
        total += probs[h];
    }
    if (!(total > 0.0)) throw InvalidArgument("categorical: probabilities sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    for (Eigen::Index h = 0; h < k; ++h) {
        acc += probs[h];
        if (u < acc) return h;
    }
    return k - 1;  // u == total up to rounding
}

}  // namespace mobs
