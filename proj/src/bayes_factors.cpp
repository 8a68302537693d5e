#include "mobs/bayes_factors.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mobs/errors.hpp"
#include "mobs/math.hpp"

namespace mobs {

LevelSuffStats accumulate_suff_stats(const Eigen::Ref<const Eigen::VectorXd>& y,
                                     const Eigen::Ref<const Codes>& x_j,
                                     const Eigen::Ref<const Eigen::VectorXi>& allocations,
                                     int k, int d) {
    LevelSuffStats s;
    detail::accumulate_suff_stats_into(s, y, x_j, allocations, k, d);
    return s;
}

double log_bf11(const LevelSuffStats& stats,
                const Eigen::Ref<const Eigen::VectorXd>& weights, const Hyperparams& hp) {
    if (weights.size() != stats.counts.rows())
        throw InvalidArgument("log_bf11: weight size mismatch");
    return detail::log_bf11_with(stats, detail::make_bf11_terms(weights, hp));
}

double log_bf12(const LevelSuffStats& stats, const MixtureDraw& draw,
                const Hyperparams& hp) {
    if (draw.weights.size() != stats.counts.rows())
        throw InvalidArgument("log_bf12: component mismatch");
    validate(draw);
    return detail::log_bf12_with(stats, detail::make_bf12_terms(draw, hp));
}

LogBfTriple make_triple(double log_bf11, double log_bf12) {
    return LogBfTriple{log_bf11, log_bf12, log_bf11 + log_bf12};
}

namespace detail {

void accumulate_suff_stats_into(LevelSuffStats& s,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Codes>& x_j,
                                const Eigen::Ref<const Eigen::VectorXi>& allocations,
                                int k, int d) {
    const Eigen::Index n = y.size();
    if (x_j.size() != n || allocations.size() != n)
        throw InvalidArgument("suff stats: size mismatch");
    if (k < 1 || d < 2) throw InvalidArgument("suff stats: need k >= 1, d >= 2");

    s.counts.setZero(k, d);
    s.sums.setZero(k, d);
    s.sumsqs.setZero(k, d);
    s.component_totals.setZero(k);
    s.n = n;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int h = allocations[i] - 1;
        const int l = x_j[i];
        if (h < 0 || h >= k) throw InvalidArgument("suff stats: allocation outside 1..k");
        if (l >= d)
            throw InvalidArgument("suff stats: code " + std::to_string(l) +
                                  " outside 0.." + std::to_string(d - 1));
        s.counts(h, l) += 1;
        s.sums(h, l) += y[i];
        s.sumsqs(h, l) += y[i] * y[i];
        s.component_totals[h] += 1;
    }
}

Bf11Terms make_bf11_terms(const Eigen::Ref<const Eigen::VectorXd>& weights,
                          const Hyperparams& hp) {
    if (!weights.allFinite() || (weights.array() < 0.0).any())
        throw InvalidArgument("log_bf11: invalid weights");

    // Floor and renormalize so a numerically zero weight cannot push the
    // Dirichlet concentration to zero or the null log-likelihood to -inf.
    Eigen::VectorXd w = weights.cwiseMax(1e-12);
    w /= w.sum();

    Bf11Terms t;
    t.conc0 = hp.tau_omega * w;
    t.lb0 = log_multivariate_beta(t.conc0);
    t.log_w.resize(w.size());
    for (Eigen::Index h = 0; h < w.size(); ++h) t.log_w[h] = std::log(w[h]);
    return t;
}

double log_bf11_with(const LevelSuffStats& stats, const Bf11Terms& t) {
    const Eigen::Index k = stats.counts.rows();
    const Eigen::Index d = stats.counts.cols();
    if (t.conc0.size() != k) throw InvalidArgument("log_bf11: weight size mismatch");

    double acc = 0.0;
    for (Eigen::Index l = 0; l < d; ++l) {
        // log beta(conc0 + counts_l) accumulated in the same index order as
        // log_multivariate_beta, so this agrees bit for bit with evaluating
        // the beta function on a materialized concentration vector.  Entries
        // stay positive and finite because conc0 was validated and counts
        // are nonnegative integers.
        double sum = 0.0, lg = 0.0;
        for (Eigen::Index h = 0; h < k; ++h) {
            const double c = t.conc0[h] + static_cast<double>(stats.counts(h, l));
            sum += c;
            lg += std::lgamma(c);
        }
        acc += (lg - std::lgamma(sum)) - t.lb0;
    }
    // Null likelihood of the same allocation counts under fixed weights.
    for (Eigen::Index h = 0; h < k; ++h)
        acc -= stats.component_totals[h] * t.log_w[h];
    return acc;
}

Bf12Terms make_bf12_terms(const MixtureDraw& draw, const Hyperparams& hp) {
    const Eigen::Index k = draw.weights.size();
    Bf12Terms t;
    t.tau_mu = hp.tau_mu;
    t.tau_sigma = hp.tau_sigma;
    t.log_tau_mu = std::log(hp.tau_mu);
    t.mu = draw.means;
    t.s2 = draw.variances;
    t.a.resize(k);
    t.b.resize(k);
    t.lgamma_a.resize(k);
    t.log_s2.resize(k);
    for (Eigen::Index h = 0; h < k; ++h) {
        const double s2 = t.s2[h];
        t.a[h] = hp.tau_sigma / (s2 * s2);  // prior shape, mean s2
        t.b[h] = hp.tau_sigma / s2;         // prior rate
        t.lgamma_a[h] = std::lgamma(t.a[h]);
        t.log_s2[h] = std::log(s2);
    }
    return t;
}

DrawBfTerms make_draw_bf_terms(const MixtureDraw& draw, const Hyperparams& hp) {
    validate(draw);
    return DrawBfTerms{make_bf11_terms(draw.weights, hp), make_bf12_terms(draw, hp)};
}

double log_bf12_with(const LevelSuffStats& stats, const Bf12Terms& t) {
    const Eigen::Index k = stats.counts.rows();
    const Eigen::Index d = stats.counts.cols();
    if (t.mu.size() != k) throw InvalidArgument("log_bf12: component mismatch");

    const double tau_mu = t.tau_mu;
    const double tau_sigma = t.tau_sigma;
    const double log_tau_mu = t.log_tau_mu;

    double acc = 0.0;
    for (Eigen::Index h = 0; h < k; ++h) {
        if (stats.component_totals[h] == 0) continue;
        const double mu = t.mu[h];
        const double s2 = t.s2[h];
        const double a_h = t.a[h];
        const double b_h = t.b[h];
        // A valid draw can still push the prior shape past double range
        // (variance below ~1e-154 squares to zero); that is a numeric-range
        // failure of the evidence computation, not malformed input.
        if (!std::isfinite(a_h) || !std::isfinite(b_h))
            throw NumericFailure("log_bf12: conditional variance prior overflows for"
                                 " component " + std::to_string(h + 1) +
                                 " (variance " + std::to_string(s2) + " too small)");

        double count_h = 0.0, sum_h = 0.0, sumsq_h = 0.0;
        for (Eigen::Index l = 0; l < d; ++l) {
            const double nc = stats.counts(h, l);
            if (nc == 0.0) continue;  // empty cells contribute exactly zero
            const double sum = stats.sums(h, l);
            const double sumsq = stats.sumsqs(h, l);
            count_h += nc;
            sum_h += sum;
            sumsq_h += sumsq;

            const double ybar = sum / nc;
            const double centered = std::max(sumsq - sum * sum / nc, 0.0);
            const double delta =
                0.5 * centered +
                (nc * tau_mu / (2.0 * (tau_mu + nc))) * (mu - ybar) * (mu - ybar);

            // a_h * log1p(delta / b_h), written so that a tiny component
            // variance (huge a_h) stays finite: with x = delta * s2 /
            // tau_sigma the alternating series a_h (x - x^2/2 + x^3/3 - ...)
            // telescopes into terms that never form a_h itself.
            const double x = delta * s2 / tau_sigma;
            double penalty;
            if (x < 1e-4) {
                penalty = delta / s2 - delta * delta / (2.0 * tau_sigma) +
                          delta * delta * delta * s2 / (3.0 * tau_sigma * tau_sigma) -
                          delta * delta * delta * delta * s2 * s2 /
                              (4.0 * tau_sigma * tau_sigma * tau_sigma);
            } else {
                penalty = a_h * std::log1p(x);
            }

            acc += 0.5 * (log_tau_mu - std::log(tau_mu + nc));
            // lgamma_ratio(a_h, nc / 2) with lgamma(a_h) reused across cells;
            // branch structure and guard match the shared helper so the
            // result is the same to the last bit.
            const double c = 0.5 * nc;
            if (!(a_h > 0.0) || !std::isfinite(c) || !(a_h + c > 0.0))
                throw InvalidArgument("lgamma_ratio: requires a > 0 and a + c > 0");
            if (a_h >= 1e8 && std::abs(c) <= 0.01 * a_h) {
                acc += c * std::log(a_h) + (a_h + c - 0.5) * std::log1p(c / a_h) - c;
            } else {
                acc += std::lgamma(a_h + c) - t.lgamma_a[h];
            }
            acc -= penalty;
            acc -= 0.5 * nc * std::log(b_h + delta);
        }
        // Null log-likelihood of component h's data under N(mu, s2), from
        // the pooled statistics; the 2 pi factors cancel against the level
        // evidence above.
        const double sse = sumsq_h - 2.0 * mu * sum_h + count_h * mu * mu;
        acc += 0.5 * count_h * t.log_s2[h] + std::max(sse, 0.0) / (2.0 * s2);
    }
    return acc;
}

void posterior_probs4(const double* log_kappa, double log_bf11, double log_bf12,
                      double* out) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    // A zero kappa silences its hypothesis even against an infinite Bayes
    // factor (-inf + inf would otherwise be NaN).
    const double lm[4] = {
        log_kappa[0],
        log_kappa[1] == neg_inf ? neg_inf : log_kappa[1] + log_bf11,
        log_kappa[2] == neg_inf ? neg_inf : log_kappa[2] + log_bf12,
        log_kappa[3] == neg_inf ? neg_inf : log_kappa[3] + log_bf11 + log_bf12};
    double mx = lm[0];
    for (int i = 1; i < 4; ++i) mx = std::max(mx, lm[i]);
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        out[i] = std::exp(lm[i] - mx);
        total += out[i];
    }
    for (int i = 0; i < 4; ++i) out[i] /= total;
}

}  // namespace detail

HypothesisProbs posterior_probs(const LogBfTriple& bf,
                                const Eigen::Ref<const Eigen::Vector4d>& kappa) {
    for (int i = 0; i < 4; ++i)
        if (!(kappa[i] >= 0.0) || !std::isfinite(kappa[i]))
            throw InvalidArgument("posterior_probs: kappa entries must be finite, >= 0");
    if (!(kappa.sum() > 0.0))
        throw InvalidArgument("posterior_probs: kappa sums to zero");
    if (std::isnan(bf.log_bf11) || std::isnan(bf.log_bf12) || std::isnan(bf.log_bf13))
        throw InvalidArgument("posterior_probs: NaN log Bayes factor");
    if (bf.log_bf13 != bf.log_bf11 + bf.log_bf12)
        throw InvalidArgument("posterior_probs: log_bf13 must equal log_bf11 + log_bf12");
    const double neg_inf = -std::numeric_limits<double>::infinity();
    double lk[4];
    for (int i = 0; i < 4; ++i)
        lk[i] = kappa[i] > 0.0 ? std::log(kappa[i]) : neg_inf;
    // All four masses can vanish only if every positive-kappa hypothesis has
    // a -inf log Bayes factor.
    bool any_mass = kappa[0] > 0.0;
    any_mass = any_mass || (kappa[1] > 0.0 && bf.log_bf11 > neg_inf);
    any_mass = any_mass || (kappa[2] > 0.0 && bf.log_bf12 > neg_inf);
    any_mass = any_mass || (kappa[3] > 0.0 && bf.log_bf13 > neg_inf);
    if (!any_mass)
        throw InvalidArgument("posterior_probs: total posterior mass is degenerate");
    double out4[4];
    detail::posterior_probs4(lk, bf.log_bf11, bf.log_bf12, out4);
    return HypothesisProbs{out4[0], out4[1], out4[2], out4[3]};
}

}  // namespace mobs
