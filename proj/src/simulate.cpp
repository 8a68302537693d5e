#include "mobs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mobs/errors.hpp"
#include "mobs/rng.hpp"

namespace mobs {

namespace {

double column_median(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

void dichotomize_into(const std::vector<double>& z, CodeMatrix& x, Eigen::Index j) {
    std::vector<double> copy(z);
    const double med = column_median(copy);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        x(i, j) = z[static_cast<std::size_t>(i)] < med ? 1 : 0;
}

}  // namespace

void validate(const SimSpec& spec) {
    if (spec.model < 1 || spec.model > 6)
        throw InvalidArgument("sim spec: model must lie in 1..6");
    if (spec.n < 2) throw InvalidArgument("sim spec: n must be >= 2");
    if (spec.p < 6) throw InvalidArgument("sim spec: p must be >= 6");
    if (spec.model % 2 == 0 && !spec.correlated)
        throw InvalidArgument("sim spec: models 2, 4, 6 require correlated = true");
    if (spec.correlated) {
        if (!(spec.rho > 0.0) || !(spec.rho < 1.0))
            throw InvalidArgument("sim spec: rho must lie in (0, 1)");
        if (spec.block_size < 2 || spec.block_size > spec.p)
            throw InvalidArgument("sim spec: block_size must lie in 2..p");
    }
}

CodeMatrix gen_uncorrelated_x(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidArgument("gen_uncorrelated_x: need n >= 1, p >= 1");
    Rng rng(seed);
    CodeMatrix x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            x(i, j) = rng.uniform() < 0.5 ? 1 : 0;  // Bernoulli(1/2)
    return x;
}

CodeMatrix gen_correlated_block(Eigen::Index n, Eigen::Index p, double rho,
                                Eigen::Index block_size, std::uint64_t seed,
                                bool literal_rows) {
    if (n < 2 || p < 1) throw InvalidArgument("gen_correlated_block: need n >= 2, p >= 1");
    if (!(rho > 0.0) || !(rho < 1.0))
        throw InvalidArgument("gen_correlated_block: rho must lie in (0, 1)");
    if (block_size < 2 || block_size > p)
        throw InvalidArgument("gen_correlated_block: block_size must lie in 2..p");

    Rng rng(seed);
    // The correlated block is a random subset of block_size columns.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    for (Eigen::Index m = 0; m < block_size; ++m)
        std::swap(order[static_cast<std::size_t>(m)],
                  order[static_cast<std::size_t>(m + rng.uniform_index(p - m))]);
    std::vector<char> selected(static_cast<std::size_t>(p), 0);
    for (Eigen::Index m = 0; m < block_size; ++m)
        selected[static_cast<std::size_t>(order[static_cast<std::size_t>(m)])] = 1;

    // Latent construction b_ij = z_i1 + a z_ij on the selected columns, with
    // z_i1 the first latent column and a = sqrt(1/rho - 1), giving pairwise
    // latent correlation 1/(1 + a^2) = rho inside the block.  The median
    // split below is scale-free, so no normalization is needed.
    const double a = std::sqrt(1.0 / rho - 1.0);
    // Rows receiving the shared factor: all by default, the first
    // ceil(rho * n) in literal-rows mode.
    const Eigen::Index shared_rows =
        literal_rows ? static_cast<Eigen::Index>(std::ceil(rho * static_cast<double>(n))) : n;

    CodeMatrix x(n, p);
    std::vector<double> z(static_cast<std::size_t>(n));
    std::vector<double> factor(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i)
            z[static_cast<std::size_t>(i)] = rng.normal(0.0, 1.0);
        if (j == 0) factor = z;
        if (selected[static_cast<std::size_t>(j)])
            for (Eigen::Index i = 0; i < shared_rows; ++i)
                z[static_cast<std::size_t>(i)] =
                    factor[static_cast<std::size_t>(i)] + a * z[static_cast<std::size_t>(i)];
        // All columns are dichotomized at their empirical median.
        dichotomize_into(z, x, j);
    }
    return x;
}

std::pair<Eigen::VectorXd, std::vector<Eigen::Index>> gen_response(const CodeMatrix& x,
                                                                   int model,
                                                                   std::uint64_t seed) {
    if (model < 1 || model > 6) throw InvalidArgument("gen_response: model must lie in 1..6");
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n < 1) throw InvalidArgument("gen_response: empty predictor matrix");
    Rng rng(seed);
    Eigen::VectorXd y(n);
    std::vector<Eigen::Index> truth;

    if (model <= 4) {
        if (p < 6) throw InvalidArgument("gen_response: p must be >= 6");
        truth = {0, 1, 2, 3, 4};
        const double coef[5] = {2.0, 1.0, -2.0, 1.0, -2.0};
        for (Eigen::Index i = 0; i < n; ++i) {
            double lin = 1.0;
            for (int m = 0; m < 5; ++m) lin += coef[m] * x(i, m);
            const double signal = model <= 2 ? lin : lin * lin;
            y[i] = signal + rng.normal(0.0, 1.0);
        }
        return {std::move(y), std::move(truth)};
    }

    if (p < 6) throw InvalidArgument("gen_response: p must be >= 6");
    // Six distinct positions by partial Fisher-Yates.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    for (int m = 0; m < 6; ++m)
        std::swap(order[static_cast<std::size_t>(m)],
                  order[static_cast<std::size_t>(m + rng.uniform_index(p - m))]);
    std::vector<Eigen::Index> positions(order.begin(), order.begin() + 6);
    truth = positions;
    std::sort(truth.begin(), truth.end());

    // One Gaussian per code configuration of the six active predictors.
    double mu[64], sd[64];
    for (int c = 0; c < 64; ++c) {
        mu[c] = rng.uniform(-1.0, 1.0);
        sd[c] = std::max(rng.uniform(0.0, 0.125), 1e-12);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        int cfg = 0;
        for (int m = 0; m < 6; ++m)
            cfg |= (x(i, positions[static_cast<std::size_t>(m)]) & 1) << m;
        y[i] = rng.normal(mu[cfg], sd[cfg]);
    }
    return {std::move(y), std::move(truth)};
}

SimInstance make_instance(const SimSpec& spec) {
    validate(spec);
    const std::uint64_t seed_x = 0, seed_y = 1;
    SimInstance out;
    CodeMatrix x =
        spec.correlated
            ? gen_correlated_block(spec.n, spec.p, spec.rho, spec.block_size,
                                   Rng::substream(spec.seed, seed_x).next_u64(),
                                   spec.literal_rows)
            : gen_uncorrelated_x(spec.n, spec.p, Rng::substream(spec.seed, seed_x).next_u64());
    auto [y, truth] = gen_response(x, spec.model, Rng::substream(spec.seed, seed_y).next_u64());
    out.data.y = std::move(y);
    out.data.x = std::move(x);
    out.data.levels = Eigen::VectorXi::Constant(spec.p, 2);
    out.truth = std::move(truth);
    validate(out.data);
    return out;
}

Eigen::VectorXd marginal_corr_scores(const Dataset& data) {
    validate(data);
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const double ybar = data.y.mean();
    const double ysd = std::sqrt((data.y.array() - ybar).square().sum());
    Eigen::VectorXd scores(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double sum = 0.0, sumsq = 0.0, cross = 0.0;
        bool missing = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::uint8_t code = data.x(i, j);
            if (code == kMissingCode) {
                missing = true;
                break;
            }
            const double v = code;
            sum += v;
            sumsq += v * v;
            cross += v * data.y[i];
        }
        if (missing) {
            scores[j] = 0.0;
            continue;
        }
        const double xsd = std::sqrt(std::max(sumsq - sum * sum / n, 0.0));
        const double cov = cross - sum * ybar;
        // Constant columns (or constant y) carry no evidence at all.
        scores[j] = xsd > 0.0 && ysd > 0.0 ? std::abs(cov / (xsd * ysd)) : 0.0;
    }
    return scores;
}

RocCurve roc_auc(const Eigen::Ref<const Eigen::VectorXd>& scores,
                 const std::vector<Eigen::Index>& truth) {
    const Eigen::Index p = scores.size();
    if (p < 2) throw InvalidArgument("roc_auc: need at least two scores");
    if (!scores.allFinite()) throw InvalidArgument("roc_auc: non-finite scores");
    std::vector<char> active(static_cast<std::size_t>(p), 0);
    for (Eigen::Index t : truth) {
        if (t < 0 || t >= p) throw InvalidArgument("roc_auc: truth index out of range");
        active[static_cast<std::size_t>(t)] = 1;
    }
    const auto positives = static_cast<Eigen::Index>(
        std::count(active.begin(), active.end(), char(1)));
    const Eigen::Index negatives = p - positives;
    if (positives == 0 || negatives == 0)
        throw InvalidArgument("roc_auc: need at least one active and one inactive index");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

    RocCurve curve;
    curve.threshold.push_back(-std::numeric_limits<double>::infinity());
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);

    Eigen::Index tp = 0, fp = 0;
    double auc = 0.0, prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        // Tied scores enter as one group, so the curve cuts straight across
        // the tie block and the trapezoid rule lands on the Mann-Whitney
        // value with the half-tie convention.
        const double value = scores[order[i]];
        while (i < order.size() && scores[order[i]] == value) {
            if (active[static_cast<std::size_t>(order[i])])
                ++tp;
            else
                ++fp;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(negatives);
        const double tpr = static_cast<double>(tp) / static_cast<double>(positives);
        curve.threshold.push_back(value);
        curve.fpr.push_back(fpr);
        curve.tpr.push_back(tpr);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.auc = auc;
    return curve;
}

}  // namespace mobs
