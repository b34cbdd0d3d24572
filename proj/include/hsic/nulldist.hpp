#pragma once

#include "hsic/kernel.hpp"
#include "hsic/statistic.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace hsic {

enum class Method { new_chi_sq, gamma, permutation };

std::string_view to_string(Method m) noexcept;
/// Accepts "new", "gamma" and "perm"/"permutation"; throws InputError otherwise.
Method parse_method(std::string_view name);

/// beta0 + beta1 * chi^2_d, fitted so its mean, variance and third central
/// moment equal those of the statistic.
struct ChiSqMatch {
    double beta0 = 0.0;
    double beta1 = 1.0;
    double d = 1.0;

    double mean() const noexcept { return beta0 + beta1 * d; }
    double variance() const noexcept { return 2.0 * beta1 * beta1 * d; }
    double third_central_moment() const noexcept { return 8.0 * beta1 * beta1 * beta1 * d; }
    double skewness() const;
};

struct GammaFit {
    double shape = 1.0;
    double scale = 1.0;
};

struct NewDetail {
    std::optional<ChiSqMatch> match;
    std::optional<GammaFit> fallback;  // set when the skewness estimate is not positive
};

struct GammaDetail {
    GammaFit fit;
};

struct PermutationDetail {
    int permutations = 0;
    int exceed_count = 0;
    std::uint64_t seed = 0;
};

struct TestResult {
    Method method = Method::new_chi_sq;
    double statistic = 0.0;
    double p_value = 1.0;
    std::variant<NewDetail, GammaDetail, PermutationDetail> detail;
    double sigma2_x = 0.0;
    double sigma2_y = 0.0;
    Eigen::Index n = 0;
};

/// Solves the three-cumulant match with A = M.c1 N.c1, B = M.c2 N.c2,
/// C = M.c3 N.c3:
///
///   beta0 = A - B^2 / C,   beta1 = C / B,   d = B^3 / C^2.
///
/// Returns nullopt when C <= 0, where no chi-square shape exists. Throws
/// DegenerateError when B <= 1e-14 * max(1, A^2): the statistic then has no
/// spread to approximate.
std::optional<ChiSqMatch> match_three_cumulants(const CumulantEstimates& M, const CumulantEstimates& N);

/// Gamma with the given mean and variance; DegenerateError unless both > 0.
GammaFit match_two_cumulants(double mean, double variance);

/// P{chi^2_d >= (T - beta0) / beta1}, or the two-cumulant Gamma tail when
/// the three-cumulant match is unavailable.
TestResult p_value_new(const StatisticValue& Tn, const CumulantEstimates& M, const CumulantEstimates& N);

/// Null mean and variance of the biased statistic T_G = n^-1 tr(HKH HLH):
///
///   mean = (1 - mu_K)(1 - mu_L) with mu the off-diagonal mean of a Gram
///          (the diagonal of a Gaussian Gram is 1; in general the mean
///          diagonal entry replaces the 1),
///   var  = 2 (n-4)(n-5) / ((n-1)(n-2)(n-3)) * n *
///          mean_{i != j} (HKH[i][j] HLH[i][j])^2.
struct GammaMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Needs n >= 6 (the variance factor vanishes at n = 4, 5); K and L are the
/// raw Grams, Kc and Lc their biased-centered forms.
GammaMoments gamma_moments(const Matrix& K, const Matrix& L, const CenteredGram& Kc, const CenteredGram& Lc);

/// Gamma tail with the given moments evaluated at the biased statistic.
TestResult p_value_gamma(const StatisticValue& TnG, const GammaMoments& moments);

/// (1 + #{permuted >= observed}) / (m + 1).
double permutation_p_value(double observed, std::span<const double> permuted);

/// Permutation test on precomputed unbiased-centered Grams. Permutation b
/// (1-based) shuffles the y side with a stream seeded by derive_seed({seed, b}),
/// so results do not depend on `threads`.
TestResult p_value_permutation(const CenteredGram& Kc, const CenteredGram& Lc, int permutations,
                               std::uint64_t seed, unsigned threads = 1);

TestResult p_value_permutation(const Sample& x, const Sample& y, const KernelConfig& kx,
                               const KernelConfig& ky, int permutations, std::uint64_t seed,
                               unsigned threads = 1);

/// Statistic of the unbiased-centered pair with the y side reordered:
/// n^-1 sum_ij Kc[i][j] Lc[order[i]][order[j]].
double permuted_statistic(const CenteredGram& Kc, const CenteredGram& Lc,
                          std::span<const Eigen::Index> order);

struct TestOptions {
    Method method = Method::new_chi_sq;
    KernelConfig kernel_x;
    KernelConfig kernel_y;
    int permutations = 200;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Full pipeline: Gram matrices, centering (biased for the Gamma method,
/// unbiased otherwise), statistic and p-value. Requires equal n >= 3.
TestResult independence_test(const Sample& x, const Sample& y, const TestOptions& opts);

}  // namespace hsic
