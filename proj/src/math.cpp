#include "mobs/math.hpp"

#include <cmath>
#include <limits>

#include "mobs/errors.hpp"

namespace mobs {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi)

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
    if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entries");
}

void require_simplex(const Eigen::Ref<const Eigen::VectorXd>& w, const char* what) {
    require_finite(w, what);
    if ((w.array() < 0.0).any())
        throw InvalidArgument(std::string(what) + ": negative weight");
    if (std::abs(w.sum() - 1.0) > 1e-8)
        throw InvalidArgument(std::string(what) + ": weights do not sum to 1");
}

}  // namespace

double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& v) {
    if (v.size() == 0) return -std::numeric_limits<double>::infinity();
    if (v.isNaN().any()) throw InvalidArgument("log_sum_exp: NaN input");
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf -> -inf; any +inf -> +inf
    return m + std::log((v - m).exp().sum());
}

double log_gauss_pdf(double t, double mean, double variance) {
    if (!std::isfinite(t) || !std::isfinite(mean) || !std::isfinite(variance) ||
        !(variance > 0.0))
        throw InvalidArgument("log_gauss_pdf: requires finite arguments, variance > 0");
    const double d = t - mean;
    return -0.5 * (kLogTwoPi + std::log(variance) + d * d / variance);
}

double log_multivariate_beta(const Eigen::Ref<const Eigen::VectorXd>& alpha) {
    if (alpha.size() == 0) throw InvalidArgument("log_multivariate_beta: empty input");
    double sum = 0.0, lg = 0.0;
    for (Eigen::Index h = 0; h < alpha.size(); ++h) {
        const double a = alpha[h];
        if (!(a > 0.0) || !std::isfinite(a))
            throw InvalidArgument("log_multivariate_beta: entries must be positive and finite");
        sum += a;
        lg += std::lgamma(a);
    }
    return lg - std::lgamma(sum);
}

double lgamma_ratio(double a, double c) {
    if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(c) || !(a + c > 0.0))
        throw InvalidArgument("lgamma_ratio: requires a > 0 and a + c > 0");
    if (c == 0.0) return 0.0;
    // For huge a, lgamma(a + c) and lgamma(a) agree in nearly all digits and
    // the direct difference loses everything.  Stirling on both terms gives
    //   lgamma(a+c) - lgamma(a)
    //     = c log a + (a + c - 1/2) log1p(c/a) - c + O(1/a),
    // accurate to ~1e-16 relative once a >> |c|.
    if (a >= 1e8 && std::abs(c) <= 0.01 * a) {
        return c * std::log(a) + (a + c - 0.5) * std::log1p(c / a) - c;
    }
    return std::lgamma(a + c) - std::lgamma(a);
}

namespace detail {

void allocation_probs_into(double y, const double* weights, const double* means,
                           const double* variances, Eigen::Index k, double* out) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index h = 0; h < k; ++h) {
        const double d = y - means[h];
        const double lg = -0.5 * (kLogTwoPi + std::log(variances[h]) + d * d / variances[h]);
        const double lw = weights[h] > 0.0 ? std::log(weights[h])
                                           : -std::numeric_limits<double>::infinity();
        out[h] = lw + lg;
        if (out[h] > mx) mx = out[h];
    }
    double total = 0.0;
    for (Eigen::Index h = 0; h < k; ++h) {
        out[h] = std::exp(out[h] - mx);
        total += out[h];
    }
    for (Eigen::Index h = 0; h < k; ++h) out[h] /= total;
}

}  // namespace detail

double mixture_log_density(double t, const Eigen::Ref<const Eigen::VectorXd>& weights,
                           const Eigen::Ref<const Eigen::VectorXd>& means,
                           const Eigen::Ref<const Eigen::VectorXd>& variances) {
    const Eigen::Index k = weights.size();
    if (k == 0 || means.size() != k || variances.size() != k)
        throw InvalidArgument("mixture_log_density: component size mismatch");
    require_simplex(weights, "mixture_log_density");
    require_finite(means, "mixture_log_density");
    if (!std::isfinite(t)) throw InvalidArgument("mixture_log_density: non-finite point");
    Eigen::ArrayXd terms(k);
    for (Eigen::Index h = 0; h < k; ++h) {
        if (!(variances[h] > 0.0) || !std::isfinite(variances[h]))
            throw InvalidArgument("mixture_log_density: variances must be positive");
        const double d = t - means[h];
        const double lg = -0.5 * (kLogTwoPi + std::log(variances[h]) + d * d / variances[h]);
        terms[h] = weights[h] > 0.0 ? std::log(weights[h]) + lg
                                    : -std::numeric_limits<double>::infinity();
    }
    return log_sum_exp(terms);
}

Eigen::VectorXd allocation_probs(double y, const Eigen::Ref<const Eigen::VectorXd>& weights,
                                 const Eigen::Ref<const Eigen::VectorXd>& means,
                                 const Eigen::Ref<const Eigen::VectorXd>& variances) {
    const Eigen::Index k = weights.size();
    if (k == 0 || means.size() != k || variances.size() != k)
        throw InvalidArgument("allocation_probs: component size mismatch");
    require_simplex(weights, "allocation_probs");
    require_finite(means, "allocation_probs");
    if (!std::isfinite(y)) throw InvalidArgument("allocation_probs: non-finite observation");
    if (!(weights.maxCoeff() > 0.0))
        throw InvalidArgument("allocation_probs: all weights zero");
    for (Eigen::Index h = 0; h < k; ++h)
        if (!(variances[h] > 0.0) || !std::isfinite(variances[h]))
            throw InvalidArgument("allocation_probs: variances must be positive");
    Eigen::VectorXd out(k);
    detail::allocation_probs_into(y, weights.data(), means.data(), variances.data(), k,
                                  out.data());
    return out;
}

double log_inv_gamma_pdf(double x, double shape, double rate) {
    if (!(x > 0.0) || !(shape > 0.0) || !(rate > 0.0) || !std::isfinite(x) ||
        !std::isfinite(shape) || !std::isfinite(rate))
        throw InvalidArgument("log_inv_gamma_pdf: requires positive finite arguments");
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) -
           rate / x;
}

double log_dirichlet_pdf(const Eigen::Ref<const Eigen::VectorXd>& w,
                         const Eigen::Ref<const Eigen::VectorXd>& conc) {
    if (w.size() != conc.size() || w.size() == 0)
        throw InvalidArgument("log_dirichlet_pdf: size mismatch");
    require_simplex(w, "log_dirichlet_pdf");
    double acc = -log_multivariate_beta(conc);
    for (Eigen::Index h = 0; h < w.size(); ++h) {
        if (conc[h] != 1.0) {
            if (!(w[h] > 0.0))
                return -std::numeric_limits<double>::infinity();
            acc += (conc[h] - 1.0) * std::log(w[h]);
        }
    }
    return acc;
}

}  // namespace mobs
