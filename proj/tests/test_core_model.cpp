#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "mobs/errors.hpp"
#include "mobs/math.hpp"
#include "mobs/rng.hpp"
#include "mobs/types.hpp"

using namespace mobs;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}
}  // namespace

TEST_CASE("log_sum_exp basics") {
    CHECK(log_sum_exp(Eigen::ArrayXd()) == -std::numeric_limits<double>::infinity());
    Eigen::ArrayXd one(1);
    one << 3.25;
    CHECK(log_sum_exp(one) == doctest::Approx(3.25).epsilon(1e-14));

    Eigen::ArrayXd v(3), shifted(3);
    v << -1.0, 0.5, 2.0;
    shifted = v + 1000.0;
    CHECK(log_sum_exp(shifted) - 1000.0 ==
          doctest::Approx(log_sum_exp(v)).epsilon(1e-12));

    // All-(-inf) input collapses to -inf instead of NaN.
    Eigen::ArrayXd tiny(2);
    tiny << -std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity();
    CHECK(log_sum_exp(tiny) == -std::numeric_limits<double>::infinity());

    Eigen::ArrayXd bad(2);
    bad << 0.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(log_sum_exp(bad), InvalidArgument);
}

TEST_CASE("log_gauss_pdf matches direct arithmetic") {
    CHECK(log_gauss_pdf(0.0, 0.0, 1.0) ==
          doctest::Approx(-0.9189385332046728).epsilon(1e-14));
    CHECK(log_gauss_pdf(1.0, 0.0, 1.0) ==
          doctest::Approx(-1.4189385332046727).epsilon(1e-14));
    CHECK(log_gauss_pdf(0.0, 0.0, 4.0) ==
          doctest::Approx(-1.612085713764618).epsilon(1e-14));

    // At the mean the exponent vanishes: -0.5 ln(2 pi v) for any m, v.
    for (double m : {-7.0, 0.0, 3.5})
        for (double v : {0.25, 1.0, 9.0})
            CHECK(log_gauss_pdf(m, m, v) ==
                  doctest::Approx(-0.5 * std::log(2.0 * M_PI * v)).epsilon(1e-14));

    CHECK_THROWS_AS(log_gauss_pdf(0.0, 0.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(log_gauss_pdf(0.0, 0.0, -1.0), InvalidArgument);
    CHECK_THROWS_AS(log_gauss_pdf(std::nan(""), 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(log_gauss_pdf(0.0, std::numeric_limits<double>::infinity(), 1.0),
                    InvalidArgument);
}

TEST_CASE("log_multivariate_beta on known values") {
    CHECK(log_multivariate_beta(vec({1.0, 1.0})) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_multivariate_beta(vec({1.0, 1.0, 1.0})) ==
          doctest::Approx(-0.6931471805599453).epsilon(1e-14));
    CHECK(log_multivariate_beta(vec({2.0, 1.0})) ==
          doctest::Approx(-0.6931471805599453).epsilon(1e-14));
    CHECK_THROWS_AS(log_multivariate_beta(vec({1.0, 0.0})), InvalidArgument);
    CHECK_THROWS_AS(log_multivariate_beta(vec({-1.0, 2.0})), InvalidArgument);
}

TEST_CASE("log_multivariate_beta increment recurrence") {
    // beta(alpha + e_h) / beta(alpha) = alpha_h / sum(alpha).
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const int k = 2 + rep % 4;
        Eigen::VectorXd alpha(k);
        for (int h = 0; h < k; ++h) alpha[h] = rng.uniform(0.1, 8.0);
        const double base = log_multivariate_beta(alpha);
        for (int h = 0; h < k; ++h) {
            Eigen::VectorXd bumped = alpha;
            bumped[h] += 1.0;
            const double expect = std::log(alpha[h] / alpha.sum());
            CHECK(log_multivariate_beta(bumped) - base ==
                  doctest::Approx(expect).epsilon(1e-11));
        }
    }
}

TEST_CASE("lgamma_ratio agrees with direct log-gamma where that is stable") {
    for (double a : {0.5, 1.0, 3.75, 120.0, 5e5}) {
        for (double c : {0.25, 1.0, 7.5}) {
            const double direct = std::lgamma(a + c) - std::lgamma(a);
            CHECK(lgamma_ratio(a, c) == doctest::Approx(direct).epsilon(1e-11));
        }
    }
    // Gamma(a+1) / Gamma(a) = a.
    for (double a : {0.5, 2.0, 1e4, 1e8, 1e12})
        CHECK(lgamma_ratio(a, 1.0) == doctest::Approx(std::log(a)).epsilon(1e-12));
    // Additivity across a split increment.
    CHECK(lgamma_ratio(3.0, 2.5) ==
          doctest::Approx(lgamma_ratio(3.0, 1.0) + lgamma_ratio(4.0, 1.5))
              .epsilon(1e-12));
}

TEST_CASE("lgamma_ratio is accurate for enormous shapes") {
    // Reference values computed with 40-digit arithmetic.
    CHECK(lgamma_ratio(1e12, 0.5) == doctest::Approx(13.81551055796415).epsilon(1e-13));
    CHECK(lgamma_ratio(3e8, 2.0) == doctest::Approx(39.03858606857428).epsilon(1e-13));
    CHECK(lgamma_ratio(1e8, 1.0) == doctest::Approx(18.420680743952367).epsilon(1e-13));
    CHECK(lgamma_ratio(5e11, -0.25) ==
          doctest::Approx(-6.734468483841838).epsilon(1e-13));
    CHECK(lgamma_ratio(2.5e9, 1.75) ==
          doctest::Approx(37.86922399569849).epsilon(1e-13));
    CHECK_THROWS_AS(lgamma_ratio(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(lgamma_ratio(2.0, -2.0), InvalidArgument);
}

TEST_CASE("mixture_log_density known values and reductions") {
    // k=1 degenerates to the plain Gaussian.
    CHECK(mixture_log_density(0.7, vec({1.0}), vec({0.2}), vec({1.3})) ==
          doctest::Approx(log_gauss_pdf(0.7, 0.2, 1.3)).epsilon(1e-14));
    // Duplicate components collapse.
    CHECK(mixture_log_density(0.4, vec({0.5, 0.5}), vec({0.0, 0.0}), vec({1.0, 1.0})) ==
          doctest::Approx(log_gauss_pdf(0.4, 0.0, 1.0)).epsilon(1e-14));
    // ln(0.5 N(0|0,1) + 0.5 N(0|1,1)); the two densities are 0.398942...
    // and 0.241971..., giving ln 0.3204565024602881.
    CHECK(mixture_log_density(0.0, vec({0.5, 0.5}), vec({0.0, 1.0}), vec({1.0, 1.0})) ==
          doctest::Approx(-1.1380087295845114).epsilon(1e-13));
    // Exchangeable under simultaneous permutation.
    CHECK(mixture_log_density(1.1, vec({0.2, 0.3, 0.5}), vec({-1.0, 0.0, 2.0}),
                              vec({0.5, 1.0, 2.0})) ==
          doctest::Approx(mixture_log_density(1.1, vec({0.5, 0.2, 0.3}),
                                              vec({2.0, -1.0, 0.0}),
                                              vec({2.0, 0.5, 1.0})))
              .epsilon(1e-14));
    // No underflow at |t| of a thousand standard deviations.
    const double far = mixture_log_density(1e3, vec({0.5, 0.5}), vec({0.0, 1.0}),
                                           vec({1.0, 1.0}));
    CHECK(std::isfinite(far));
    CHECK(far < -4e5);

    CHECK_THROWS_AS(mixture_log_density(0.0, vec({0.7, 0.7}), vec({0.0, 0.0}),
                                        vec({1.0, 1.0})),
                    InvalidArgument);
    CHECK_THROWS_AS(mixture_log_density(0.0, vec({0.5, 0.5}), vec({0.0, 0.0}),
                                        vec({1.0, 0.0})),
                    InvalidArgument);
}

TEST_CASE("allocation_probs closed forms") {
    // Identical components return the weights unchanged.
    const Eigen::VectorXd same = allocation_probs(0.3, vec({0.2, 0.3, 0.5}),
                                                  vec({1.0, 1.0, 1.0}),
                                                  vec({2.0, 2.0, 2.0}));
    CHECK(same[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(same[1] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(same[2] == doctest::Approx(0.5).epsilon(1e-12));

    // Symmetric midpoint.
    const Eigen::VectorXd mid =
        allocation_probs(1.0, vec({0.5, 0.5}), vec({0.0, 2.0}), vec({1.5, 1.5}));
    CHECK(mid[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mid[1] == doctest::Approx(0.5).epsilon(1e-12));

    // y=0, means (0,1), unit variances: density ratio e^{1/2}.
    const Eigen::VectorXd ex =
        allocation_probs(0.0, vec({0.5, 0.5}), vec({0.0, 1.0}), vec({1.0, 1.0}));
    CHECK(ex[0] == doctest::Approx(0.6224593312018546).epsilon(1e-13));
    CHECK(ex[1] == doctest::Approx(0.37754066879814546).epsilon(1e-13));

    // Always a simplex, even very far in the tails.
    const Eigen::VectorXd tail =
        allocation_probs(500.0, vec({0.1, 0.9}), vec({0.0, 1.0}), vec({1.0, 2.0}));
    CHECK(tail.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tail.minCoeff() >= 0.0);
}

TEST_CASE("log_inv_gamma_pdf and log_dirichlet_pdf spot values") {
    // IGa(1 | 1, 1): ln(1 * e^{-1}) = -1.
    CHECK(log_inv_gamma_pdf(1.0, 1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK_THROWS_AS(log_inv_gamma_pdf(0.0, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(log_inv_gamma_pdf(1.0, 0.0, 1.0), InvalidArgument);

    // Dir(w | 1,1) is uniform on the simplex: log density 0.
    CHECK(log_dirichlet_pdf(vec({0.3, 0.7}), vec({1.0, 1.0})) ==
          doctest::Approx(0.0).epsilon(1e-13));
    // Dir(w | 2,1) at (0.3, 0.7): ln(2 * 0.3).
    CHECK(log_dirichlet_pdf(vec({0.3, 0.7}), vec({2.0, 1.0})) ==
          doctest::Approx(-0.5108256237659907).epsilon(1e-13));
    CHECK_THROWS_AS(log_dirichlet_pdf(vec({0.5, 0.6}), vec({1.0, 1.0})),
                    InvalidArgument);
}

TEST_CASE("Hyperparams validation") {
    Hyperparams hp;
    CHECK_NOTHROW(validate(hp));

    Hyperparams bad = hp;
    bad.kappa = Eigen::Vector4d(0.5, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(validate(bad), InvalidArgument);

    bad = hp;
    bad.kappa = Eigen::Vector4d(0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3);
    CHECK_THROWS_AS(validate(bad), InvalidArgument);  // kappa0 must stay positive

    bad = hp;
    bad.tau_omega = 0.0;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = hp;
    bad.k = 0;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = hp;
    bad.b = -0.1;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
}

TEST_CASE("MixtureDraw validation") {
    MixtureDraw draw;
    draw.weights = vec({0.4, 0.6});
    draw.means = vec({-1.0, 2.0});
    draw.variances = vec({1.0, 0.5});
    draw.allocations = Eigen::VectorXi(3);
    draw.allocations << 1, 2, 2;
    CHECK_NOTHROW(validate(draw));

    MixtureDraw bad = draw;
    bad.allocations[0] = 0;  // components are indexed 1..k
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = draw;
    bad.allocations[0] = 3;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = draw;
    bad.variances[1] = 0.0;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = draw;
    bad.weights = vec({0.4, 0.7});
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = draw;
    bad.means = vec({0.0});
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
}

TEST_CASE("Dataset validation") {
    Dataset data;
    data.y = vec({0.0, 1.0, 2.0});
    data.x = CodeMatrix(3, 2);
    data.x << 0, 1, 1, 0, 1, 1;
    data.levels = Eigen::VectorXi(2);
    data.levels << 2, 2;
    CHECK_NOTHROW(validate(data));
    CHECK(data.n() == 3);
    CHECK(data.p() == 2);

    // Missing codes are always legal.
    data.x(0, 0) = kMissingCode;
    CHECK_NOTHROW(validate(data));

    Dataset bad = data;
    bad.x(1, 1) = 2;  // code beyond the binary level count
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = data;
    bad.levels[0] = 1;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = data;
    bad.y[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    bad = data;
    bad.y = vec({0.0, 1.0});
    CHECK_THROWS_AS(validate(bad), InvalidArgument);

    // The widest supported cardinality: 255 levels, codes up to 254.
    Dataset wide;
    wide.y = vec({0.5, -0.5});
    wide.x = CodeMatrix(2, 1);
    wide.x << 0, 254;
    wide.levels = Eigen::VectorXi(1);
    wide.levels << 255;
    CHECK_NOTHROW(validate(wide));
    wide.levels << 256;
    CHECK_THROWS_AS(validate(wide), InvalidArgument);
}

TEST_CASE("HypothesisProbs validation") {
    HypothesisProbs probs;  // defaults to certain null
    CHECK(probs.sum() == doctest::Approx(1.0));
    CHECK_NOTHROW(validate(probs));
    probs.p0 = 0.25;
    probs.p11 = 0.25;
    probs.p12 = 0.25;
    probs.p13 = 0.25;
    CHECK_NOTHROW(validate(probs));
    probs.p13 = 0.3;
    CHECK_THROWS_AS(validate(probs), InvalidArgument);
    probs = HypothesisProbs{};
    probs.p0 = 1.5;
    probs.p11 = -0.5;
    CHECK_THROWS_AS(validate(probs), InvalidArgument);
}
