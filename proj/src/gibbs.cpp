#include "mobs/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mobs/errors.hpp"
#include "mobs/math.hpp"

namespace mobs {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void require_response(const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (y.size() == 0) throw InvalidArgument("gibbs: empty response");
    if (!y.allFinite()) throw InvalidArgument("gibbs: non-finite response values");
}

double population_variance(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) return 0.0;
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size());
}

}  // namespace

void validate(const ChainConfig& cfg) {
    if (cfg.total_iters < 1) throw InvalidArgument("chain config: total_iters must be >= 1");
    if (cfg.burn_in < 0) throw InvalidArgument("chain config: burn_in must be >= 0");
    if (cfg.keep < 1) throw InvalidArgument("chain config: keep must be >= 1");
    if (cfg.thin < 1) throw InvalidArgument("chain config: thin must be >= 1");
    if (cfg.burn_in + static_cast<long>(cfg.keep) * cfg.thin > cfg.total_iters)
        throw InvalidArgument(
            "chain config: burn_in + keep * thin exceeds total_iters (" +
            std::to_string(cfg.burn_in) + " + " + std::to_string(cfg.keep) + " * " +
            std::to_string(cfg.thin) + " > " + std::to_string(cfg.total_iters) + ")");
}

Eigen::VectorXi sample_allocations(const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const MixtureDraw& draw, Rng& rng) {
    require_response(y);
    validate(draw);
    const Eigen::Index n = y.size();
    const Eigen::Index k = draw.weights.size();
    // Per-scan constants: log w_h - (log 2 pi + log sigma2_h) / 2 and the
    // quadratic coefficient, so the inner loop is one fma and one exp per
    // component.
    Eigen::ArrayXd base(k), half_inv(k);
    for (Eigen::Index h = 0; h < k; ++h) {
        base[h] = (draw.weights[h] > 0.0 ? std::log(draw.weights[h])
                                         : -std::numeric_limits<double>::infinity()) -
                  0.5 * (kLogTwoPi + std::log(draw.variances[h]));
        half_inv[h] = 0.5 / draw.variances[h];
    }
    Eigen::VectorXi c(n);
    Eigen::ArrayXd logit(k), prob(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index h = 0; h < k; ++h) {
            const double d = y[i] - draw.means[h];
            logit[h] = base[h] - d * d * half_inv[h];
            if (logit[h] > mx) mx = logit[h];
        }
        double total = 0.0;
        for (Eigen::Index h = 0; h < k; ++h) {
            prob[h] = std::exp(logit[h] - mx);
            total += prob[h];
        }
        const double u = rng.uniform() * total;
        double acc = 0.0;
        Eigen::Index pick = k - 1;
        for (Eigen::Index h = 0; h < k; ++h) {
            acc += prob[h];
            if (u < acc) {
                pick = h;
                break;
            }
        }
        c[i] = static_cast<int>(pick) + 1;
    }
    return c;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_components(
    const Eigen::Ref<const Eigen::VectorXd>& y,
    const Eigen::Ref<const Eigen::VectorXi>& allocations, const Hyperparams& hp,
    Rng& rng) {
    require_response(y);
    validate(hp);
    const Eigen::Index n = y.size();
    const int k = hp.k;
    if (allocations.size() != n)
        throw InvalidArgument("sample_components: allocation size mismatch");

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int h = allocations[i] - 1;
        if (h < 0 || h >= k)
            throw InvalidArgument("sample_components: allocation outside 1..k");
        count[h] += 1;
        sum[h] += y[i];
    }
    Eigen::VectorXd ybar = Eigen::VectorXd::Zero(k);
    for (int h = 0; h < k; ++h)
        if (count[h] > 0) ybar[h] = sum[h] / count[h];
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(k);  // centered sums of squares
    for (Eigen::Index i = 0; i < n; ++i) {
        const int h = allocations[i] - 1;
        const double d = y[i] - ybar[h];
        ss[h] += d * d;
    }

    Eigen::VectorXd means(k), variances(k);
    for (int h = 0; h < k; ++h) {
        const double nh = count[h];
        // Empty components fall back to the prior exactly (nh = 0 zeroes
        // every data term below).
        const double a_hat = hp.a + 0.5 * nh;
        const double shrink =
            nh > 0.0 ? (nh / (1.0 + hp.q * nh)) * (ybar[h] - hp.mu0) * (ybar[h] - hp.mu0)
                     : 0.0;
        const double b_hat = hp.b + 0.5 * (ss[h] + shrink);
        variances[h] = rng.inverse_gamma(a_hat, b_hat);
        const double q_hat = 1.0 / (1.0 / hp.q + nh);
        const double m_hat = q_hat * (hp.mu0 / hp.q + nh * ybar[h]);
        means[h] = rng.normal(m_hat, std::sqrt(q_hat * variances[h]));
    }
    return {std::move(means), std::move(variances)};
}

Eigen::VectorXd sample_weights(const Eigen::Ref<const Eigen::VectorXi>& allocations,
                               const Hyperparams& hp, Rng& rng) {
    validate(hp);
    const int k = hp.k;
    Eigen::VectorXd conc = Eigen::VectorXd::Constant(k, hp.alpha / k);
    for (Eigen::Index i = 0; i < allocations.size(); ++i) {
        const int h = allocations[i] - 1;
        if (h < 0 || h >= k)
            throw InvalidArgument("sample_weights: allocation outside 1..k");
        conc[h] += 1.0;
    }
    Eigen::VectorXd w(k);
    rng.dirichlet(conc, w);
    return w;
}

double log_joint_density(const Eigen::Ref<const Eigen::VectorXd>& y,
                         const MixtureDraw& draw, const Hyperparams& hp) {
    require_response(y);
    validate(hp);
    validate(draw);
    const Eigen::Index k = draw.weights.size();
    if (k != hp.k) throw InvalidArgument("log_joint_density: k mismatch");
    if (draw.allocations.size() != y.size())
        throw InvalidArgument("log_joint_density: allocation size mismatch");

    const Eigen::VectorXd conc = Eigen::VectorXd::Constant(k, hp.alpha / k);
    double acc = log_dirichlet_pdf(draw.weights, conc);
    for (Eigen::Index h = 0; h < k; ++h) {
        acc += log_inv_gamma_pdf(draw.variances[h], hp.a, hp.b);
        acc += log_gauss_pdf(draw.means[h], hp.mu0, hp.q * draw.variances[h]);
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const int h = draw.allocations[i] - 1;
        acc += draw.weights[h] > 0.0 ? std::log(draw.weights[h])
                                     : -std::numeric_limits<double>::infinity();
        acc += log_gauss_pdf(y[i], draw.means[h], draw.variances[h]);
    }
    return acc;
}

MixtureDraw initial_draw(const Eigen::Ref<const Eigen::VectorXd>& y, int k) {
    require_response(y);
    if (k < 1) throw InvalidArgument("initial_draw: k must be >= 1");
    const Eigen::Index n = y.size();

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return y[a] < y[b]; });

    MixtureDraw draw;
    draw.allocations.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto g = static_cast<int>((r * k) / n);
        draw.allocations[order[r]] = g + 1;
    }
    const double overall_mean = y.mean();
    const double var_floor = std::max(1e-6 * population_variance(y), 1e-12);

    draw.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
    draw.means.resize(k);
    draw.variances.resize(k);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k), sumsq = Eigen::VectorXd::Zero(k);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int h = draw.allocations[i] - 1;
        count[h] += 1;
        sum[h] += y[i];
        sumsq[h] += y[i] * y[i];
    }
    for (int h = 0; h < k; ++h) {
        if (count[h] == 0) {  // only when n < k
            draw.means[h] = overall_mean;
            draw.variances[h] = var_floor;
            continue;
        }
        const double m = sum[h] / count[h];
        draw.means[h] = m;
        draw.variances[h] = std::max(sumsq[h] / count[h] - m * m, var_floor);
    }
    return draw;
}

ChainOutput run_chain(const Eigen::Ref<const Eigen::VectorXd>& y, const Hyperparams& hp,
                      const ChainConfig& cfg) {
    require_response(y);
    validate(hp);
    validate(cfg);

    Rng rng(cfg.seed);
    MixtureDraw state = initial_draw(y, hp.k);

    ChainOutput out;
    out.draws.reserve(cfg.keep);
    out.log_joint_trace.reserve(cfg.total_iters);

    for (int t = 1; t <= cfg.total_iters; ++t) {
        state.allocations = sample_allocations(y, state, rng);
        auto [means, variances] = sample_components(y, state.allocations, hp, rng);
        state.means = std::move(means);
        state.variances = std::move(variances);
        state.weights = sample_weights(state.allocations, hp, rng);

        if (!state.weights.allFinite() || !state.means.allFinite() ||
            !state.variances.allFinite() || !(state.variances.array() > 0.0).all())
            throw NumericFailure("gibbs: non-finite state at iteration " +
                                 std::to_string(t));

        out.log_joint_trace.push_back(log_joint_density(y, state, hp));

        if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 &&
            (t - cfg.burn_in) / cfg.thin <= cfg.keep)
            out.draws.push_back(state);
    }
    return out;
}

}  // namespace mobs
