#include "hsic/centering.hpp"
#include "hsic/error.hpp"
#include "hsic/incomplete_gamma.hpp"
#include "hsic/nulldist.hpp"
#include "oracles.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace hsic;

namespace {

CumulantEstimates cum(double c1, double c2, double c3) { return {c1, c2, c3, 10}; }

StatisticValue unbiased_stat(double v) { return {v, StatisticKind::new_unbiased, 10}; }
StatisticValue biased_stat(double v) { return {v, StatisticKind::gretton_biased, 10}; }

Sample normal_sample(int n, int p, std::mt19937_64& gen) {
    std::normal_distribution<double> z;
    RowMatrix m(n, p);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(gen);
    return Sample::vectors(m);
}

}  // namespace

TEST(ChiSqSf, Examples) {
    for (double d : {0.01, 0.5, 1.0, 7.0, 400.0}) EXPECT_EQ(chi_sq_sf(0.0, d), 1.0);
    EXPECT_EQ(chi_sq_sf(-3.0, 2.0), 1.0);
    EXPECT_NEAR(chi_sq_sf(2.0, 2.0), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(chi_sq_sf(3.841459, 1.0), 0.05, 1e-4);
}

TEST(ChiSqSf, RejectsBadDegrees) {
    EXPECT_THROW(chi_sq_sf(1.0, 0.0), InputError);
    EXPECT_THROW(chi_sq_sf(1.0, -1.0), InputError);
    EXPECT_THROW(chi_sq_sf(1.0, std::nan("")), InputError);
}

TEST(ChiSqSf, TwoDegreesClosedForm) {
    for (int i = 0; i <= 1000; ++i) {
        const double x = 0.1 * i;
        EXPECT_NEAR(chi_sq_sf(x, 2.0), std::exp(-x / 2.0), 1e-12) << x;
    }
}

TEST(ChiSqSf, MatchesBoostAcrossDomain) {
    const double ds[] = {0.01, 0.1, 0.5, 1.0, 2.5, 10.0, 49.5, 100.0, 333.3, 1000.0};
    for (double d : ds) {
        for (int i = 0; i <= 200; ++i) {
            const double x = 1000.0 * std::pow(i / 200.0, 2.0);
            const double want = x <= 0.0 ? 1.0 : boost::math::gamma_q(d / 2.0, x / 2.0);
            EXPECT_NEAR(chi_sq_sf(x, d), want, 1e-10) << "x=" << x << " d=" << d;
        }
    }
}

TEST(GammaSf, ShapeTwoClosedForm) {
    for (double x : {0.0, 0.3, 2.0, 5.0, 20.0}) {
        EXPECT_NEAR(gamma_sf(x, 2.0, 1.0), (1.0 + x) * std::exp(-x), 1e-12);
    }
}

TEST(MatchThreeCumulants, Examples) {
    const auto unit = match_three_cumulants(cum(1, 1, 1), cum(1, 1, 1));
    ASSERT_TRUE(unit);
    EXPECT_NEAR(unit->beta0, 0.0, 1e-15);
    EXPECT_NEAR(unit->beta1, 1.0, 1e-15);
    EXPECT_NEAR(unit->d, 1.0, 1e-15);

    const auto m = match_three_cumulants(cum(2, 4, 8), cum(1, 1, 1));
    ASSERT_TRUE(m);
    EXPECT_NEAR(m->beta0, 0.0, 1e-15);
    EXPECT_NEAR(m->beta1, 2.0, 1e-15);
    EXPECT_NEAR(m->d, 1.0, 1e-15);
}

TEST(MatchThreeCumulants, NonPositiveSkewSignalsFallback) {
    EXPECT_FALSE(match_three_cumulants(cum(1, 1, -0.5), cum(1, 1, 1)));
    EXPECT_FALSE(match_three_cumulants(cum(1, 1, 0.0), cum(1, 1, 1)));
}

TEST(MatchThreeCumulants, NoVarianceIsDegenerate) {
    EXPECT_THROW(match_three_cumulants(cum(1, 0, 1), cum(1, 1, 1)), DegenerateError);
}

TEST(MatchThreeCumulants, ReproducesMoments) {
    std::mt19937_64 gen(8);
    for (int rep = 0; rep < 500; ++rep) {
        const auto a = oracle::mixture_cumulants(gen);
        const auto b = oracle::mixture_cumulants(gen);
        const CumulantEstimates M = cum(a.c1, a.c2, a.c3);
        const CumulantEstimates N = cum(b.c1, b.c2, b.c3);
        const auto m = match_three_cumulants(M, N);
        ASSERT_TRUE(m);
        EXPECT_LE(oracle::rel_err(m->mean(), M.c1 * N.c1), 1e-10);
        EXPECT_LE(oracle::rel_err(m->variance(), 2 * M.c2 * N.c2), 1e-10);
        EXPECT_LE(oracle::rel_err(m->third_central_moment(), 8 * M.c3 * N.c3), 1e-10);
        const double skew = 8 * M.c3 * N.c3 / std::pow(2 * M.c2 * N.c2, 1.5);
        EXPECT_LE(oracle::rel_err(m->skewness(), skew), 1e-10);
    }
}

TEST(PValueNew, Examples) {
    const auto M = cum(1, 1, 1);
    EXPECT_EQ(p_value_new(unbiased_stat(0.0), M, M).p_value, 1.0);
    EXPECT_NEAR(p_value_new(unbiased_stat(3.841459), M, M).p_value, 0.05, 1e-4);
    EXPECT_LT(p_value_new(unbiased_stat(200.0), M, M).p_value, 1e-40);
}

TEST(PValueNew, StrictlyDecreasing) {
    const auto M = cum(0.3, 0.02, 0.004);
    const auto N = cum(0.5, 0.05, 0.01);
    double previous = 2.0;
    for (int i = 0; i < 60; ++i) {
        const double p = p_value_new(unbiased_stat(-0.1 + 0.05 * i), M, N).p_value;
        if (p < 1.0) {
            EXPECT_LT(p, previous);
        }
        previous = p;
    }
}

TEST(PValueNew, FallbackIsFlagged) {
    const TestResult r = p_value_new(unbiased_stat(1.0), cum(1, 1, -1), cum(1, 1, 1));
    const auto& d = std::get<NewDetail>(r.detail);
    EXPECT_FALSE(d.match);
    ASSERT_TRUE(d.fallback);
    EXPECT_NEAR(d.fallback->shape, 0.5, 1e-15);
    EXPECT_NEAR(d.fallback->scale, 2.0, 1e-15);
    EXPECT_NEAR(r.p_value, chi_sq_sf(1.0, 1.0), 1e-12);
}

TEST(PValueNew, RejectsBiasedStatistic) {
    EXPECT_THROW(p_value_new(biased_stat(1.0), cum(1, 1, 1), cum(1, 1, 1)), InputError);
}

TEST(PValueGamma, Examples) {
    EXPECT_EQ(p_value_gamma(biased_stat(0.0), {1.0, 2.0}).p_value, 1.0);
    const TestResult chi1 = p_value_gamma(biased_stat(3.841459), {1.0, 2.0});
    EXPECT_NEAR(chi1.p_value, 0.05, 1e-4);
    const auto& fit = std::get<GammaDetail>(chi1.detail).fit;
    EXPECT_NEAR(fit.shape, 0.5, 1e-15);
    EXPECT_NEAR(fit.scale, 2.0, 1e-15);
    EXPECT_NEAR(p_value_gamma(biased_stat(2.0), {2.0, 2.0}).p_value, 3.0 * std::exp(-2.0), 1e-12);
}

TEST(PValueGamma, DegenerateMoments) {
    EXPECT_THROW(p_value_gamma(biased_stat(1.0), {0.0, 1.0}), DegenerateError);
    EXPECT_THROW(p_value_gamma(biased_stat(1.0), {1.0, 0.0}), DegenerateError);
    EXPECT_THROW(p_value_gamma(unbiased_stat(1.0), {1.0, 1.0}), InputError);
}

TEST(GammaMoments, MatchesExplicitFormula) {
    std::mt19937_64 gen(61);
    for (int n : {6, 9, 25}) {
        const Sample x = normal_sample(n, 2, gen);
        const Sample y = normal_sample(n, 3, gen);
        const Matrix K = gram(x, KernelConfig::fixed(1.3)).values;
        const Matrix L = gram(y, KernelConfig::fixed(0.8)).values;
        const Matrix Kh = oracle::h_center(K);
        const Matrix Lh = oracle::h_center(L);

        double offk = 0, offl = 0, sq = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) {
                    offk += K(i, j);
                    offl += L(i, j);
                    sq += std::pow(Kh(i, j) * Lh(i, j), 2);
                }
        const double nd = n;
        const double mux = offk / (nd * (nd - 1)), muy = offl / (nd * (nd - 1));
        // moments of HSIC_b = tr(HKH HLH)/n^2, rescaled to T_G = n HSIC_b
        const double mean_b = (1.0 + mux * muy - mux - muy) / nd;
        const double var_b = 2.0 * (nd - 4) * (nd - 5) / (nd * (nd - 1) * (nd - 2) * (nd - 3)) * sq / (nd * (nd - 1));

        const GammaMoments got = gamma_moments(K, L, center_biased(K), center_biased(L));
        EXPECT_LE(oracle::rel_err(got.mean, nd * mean_b), 1e-12) << n;
        EXPECT_LE(oracle::rel_err(got.variance, nd * nd * var_b), 1e-12) << n;
    }
}

TEST(GammaMoments, NeedsSixObservations) {
    const Matrix K = Matrix::Identity(5, 5);
    EXPECT_THROW(gamma_moments(K, K, center_biased(K), center_biased(K)), InputError);
    EXPECT_THROW(gamma_moments(K, K, center_unbiased(K), center_unbiased(K)), InputError);
}

TEST(PermutationPValue, Examples) {
    const double perms[] = {0.1, 0.2, 0.3};
    EXPECT_DOUBLE_EQ(permutation_p_value(0.25, perms), 0.5);
    EXPECT_DOUBLE_EQ(permutation_p_value(0.31, perms), 0.25);
    EXPECT_DOUBLE_EQ(permutation_p_value(0.05, perms), 1.0);
    EXPECT_DOUBLE_EQ(permutation_p_value(0.1, perms), 1.0);
    EXPECT_THROW(permutation_p_value(0.1, std::span<const double>()), InputError);
}

TEST(PermutationTest, DeterministicAcrossThreads) {
    std::mt19937_64 gen(15);
    const Sample x = normal_sample(30, 2, gen);
    const Sample y = normal_sample(30, 2, gen);
    const auto k = KernelConfig::automatic();
    const TestResult a = p_value_permutation(x, y, k, k, 150, 42, 1);
    const TestResult b = p_value_permutation(x, y, k, k, 150, 42, 4);
    EXPECT_EQ(a.p_value, b.p_value);
    const auto& d = std::get<PermutationDetail>(a.detail);
    EXPECT_EQ(d.exceed_count, std::get<PermutationDetail>(b.detail).exceed_count);
    EXPECT_EQ(d.permutations, 150);
    EXPECT_EQ(d.seed, 42u);
    EXPECT_EQ(a.p_value, (1.0 + d.exceed_count) / (d.permutations + 1.0));
}

TEST(PermutationTest, ObservedStatisticMatchesDirect) {
    std::mt19937_64 gen(16);
    const Sample x = normal_sample(20, 3, gen);
    const Sample y = normal_sample(20, 1, gen);
    const CenteredGram Kc = center_unbiased(gram(x, KernelConfig::fixed(2.0)));
    const CenteredGram Lc = center_unbiased(gram(y, KernelConfig::fixed(2.0)));
    const TestResult r = p_value_permutation(Kc, Lc, 10, 1);
    EXPECT_NEAR(r.statistic, statistic(Kc, Lc).value, 1e-13);
}

TEST(PermutationTest, RejectsBadArguments) {
    const CenteredGram Kc = center_unbiased(Matrix::Identity(4, 4));
    EXPECT_THROW(p_value_permutation(Kc, Kc, 0, 1), InputError);
    EXPECT_THROW(p_value_permutation(Kc, center_biased(Matrix::Identity(4, 4)), 5, 1), InputError);
}

TEST(IndependenceTest, JointPermutationLeavesStatisticUnchanged) {
    std::mt19937_64 gen(33);
    const Sample x = normal_sample(25, 4, gen);
    const Sample y = normal_sample(25, 2, gen);
    std::vector<Eigen::Index> order(25);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    const TestOptions opts;
    const TestResult a = independence_test(x, y, opts);
    const TestResult b = independence_test(x.permuted(order), y.permuted(order), opts);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-12);
}

TEST(IndependenceTest, DetectsSelfDependence) {
    std::mt19937_64 gen(34);
    const Sample x = normal_sample(15, 3, gen);
    for (Method m : {Method::new_chi_sq, Method::gamma, Method::permutation}) {
        TestOptions opts;
        opts.method = m;
        const TestResult r = independence_test(x, x, opts);
        EXPECT_LT(r.p_value, 0.05) << to_string(m);
        EXPECT_GT(r.sigma2_x, 0.0);
        EXPECT_EQ(r.sigma2_x, r.sigma2_y);
        EXPECT_EQ(r.n, 15);
    }
}

TEST(IndependenceTest, InputChecks) {
    std::mt19937_64 gen(35);
    EXPECT_THROW(independence_test(normal_sample(5, 1, gen), normal_sample(6, 1, gen), {}), InputError);
    EXPECT_THROW(independence_test(normal_sample(2, 1, gen), normal_sample(2, 1, gen), {}), InputError);
    RowMatrix same = RowMatrix::Ones(6, 2);
    EXPECT_THROW(independence_test(Sample::vectors(same), normal_sample(6, 1, gen), {}), DegenerateError);
}

TEST(Method, ParseAndPrint) {
    EXPECT_EQ(parse_method("new"), Method::new_chi_sq);
    EXPECT_EQ(parse_method("gamma"), Method::gamma);
    EXPECT_EQ(parse_method("perm"), Method::permutation);
    EXPECT_EQ(parse_method("permutation"), Method::permutation);
    EXPECT_THROW(parse_method("fast"), InputError);
    EXPECT_EQ(to_string(Method::permutation), "perm");
}
