#include "hsic/nulldist.hpp"

#include "hsic/error.hpp"
#include "hsic/incomplete_gamma.hpp"
#include "hsic/parallel.hpp"
#include "hsic/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hsic {

namespace {

constexpr double kDegenerateVariance = 1e-14;

// Mean diagonal entry minus mean off-diagonal entry.
double diagonal_excess(const Matrix& K) {
    const double n = static_cast<double>(K.rows());
    const double trace = K.trace();
    return trace / n - (K.sum() - trace) / (n * (n - 1.0));
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::new_chi_sq: return "new";
        case Method::gamma: return "gamma";
        case Method::permutation: return "perm";
    }
    return "new";
}

Method parse_method(std::string_view name) {
    if (name == "new") return Method::new_chi_sq;
    if (name == "gamma") return Method::gamma;
    if (name == "perm" || name == "permutation") return Method::permutation;
    throw InputError("unknown method '" + std::string(name) + "' (expected new, gamma or perm)");
}

double ChiSqMatch::skewness() const { return std::sqrt(8.0 / d); }

std::optional<ChiSqMatch> match_three_cumulants(const CumulantEstimates& M, const CumulantEstimates& N) {
    const double a = M.c1 * N.c1;
    const double b = M.c2 * N.c2;
    const double c = M.c3 * N.c3;
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw NumericError("non-finite cumulant products");
    }
    if (b <= kDegenerateVariance * std::max(1.0, a * a)) {
        throw DegenerateError("statistic has no null variance (constant kernel or degenerate sample)");
    }
    if (c <= 0.0) {
        return std::nullopt;
    }
    ChiSqMatch match;
    match.beta0 = a - b * b / c;
    match.beta1 = c / b;
    match.d = b * b * b / (c * c);
    if (!std::isfinite(match.d) || match.d <= 0.0) {
        throw NumericError("chi-square degrees of freedom out of range");
    }
    return match;
}

GammaFit match_two_cumulants(double mean, double variance) {
    if (!(mean > 0.0) || !(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
        throw DegenerateError("Gamma approximation needs positive mean and variance (mean " +
                              std::to_string(mean) + ", variance " + std::to_string(variance) + ")");
    }
    return GammaFit{mean * mean / variance, variance / mean};
}

TestResult p_value_new(const StatisticValue& Tn, const CumulantEstimates& M, const CumulantEstimates& N) {
    if (Tn.kind != StatisticKind::new_unbiased) {
        throw InputError("the chi-square approximation needs the unbiased statistic");
    }
    TestResult result;
    result.method = Method::new_chi_sq;
    result.statistic = Tn.value;
    result.n = Tn.n;

    NewDetail detail;
    detail.match = match_three_cumulants(M, N);
    if (detail.match) {
        const ChiSqMatch& m = *detail.match;
        result.p_value = chi_sq_sf((Tn.value - m.beta0) / m.beta1, m.d);
    } else {
        detail.fallback = match_two_cumulants(M.c1 * N.c1, 2.0 * M.c2 * N.c2);
        result.p_value = gamma_sf(Tn.value, detail.fallback->shape, detail.fallback->scale);
    }
    result.detail = detail;
    return result;
}

GammaMoments gamma_moments(const Matrix& K, const Matrix& L, const CenteredGram& Kc, const CenteredGram& Lc) {
    const Eigen::Index n = K.rows();
    if (K.cols() != n || L.rows() != n || L.cols() != n || Kc.size() != n || Lc.size() != n) {
        throw InputError("Gram matrices differ in size");
    }
    if (Kc.mode != Centering::biased || Lc.mode != Centering::biased) {
        throw InputError("Gamma moments use biased centering");
    }
    if (n < 6) {
        throw InputError("the Gamma approximation needs n >= 6");
    }
    const double nd = static_cast<double>(n);
    const Matrix prod = Kc.values.cwiseProduct(Lc.values);
    const double off_sq = prod.squaredNorm() - prod.diagonal().squaredNorm();
    const double factor = 2.0 * (nd - 4.0) * (nd - 5.0) / ((nd - 1.0) * (nd - 2.0) * (nd - 3.0));

    GammaMoments m;
    m.mean = diagonal_excess(K) * diagonal_excess(L);
    m.variance = factor * nd * off_sq / (nd * (nd - 1.0));
    if (!std::isfinite(m.mean) || !std::isfinite(m.variance)) {
        throw NumericError("non-finite Gamma moments");
    }
    return m;
}

TestResult p_value_gamma(const StatisticValue& TnG, const GammaMoments& moments) {
    if (TnG.kind != StatisticKind::gretton_biased) {
        throw InputError("the Gamma approximation needs the biased statistic");
    }
    const GammaFit fit = match_two_cumulants(moments.mean, moments.variance);
    TestResult result;
    result.method = Method::gamma;
    result.statistic = TnG.value;
    result.n = TnG.n;
    result.p_value = gamma_sf(TnG.value, fit.shape, fit.scale);
    result.detail = GammaDetail{fit};
    return result;
}

double permutation_p_value(double observed, std::span<const double> permuted) {
    if (permuted.empty()) {
        throw InputError("permutation test needs at least one permutation");
    }
    const auto exceed = std::count_if(permuted.begin(), permuted.end(),
                                      [observed](double t) { return t >= observed; });
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(permuted.size()) + 1.0);
}

double permuted_statistic(const CenteredGram& Kc, const CenteredGram& Lc,
                          std::span<const Eigen::Index> order) {
    const Eigen::Index n = Kc.size();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index pj = order[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            acc += Kc.values(i, j) * Lc.values(order[static_cast<std::size_t>(i)], pj);
        }
    }
    return acc / static_cast<double>(n);
}

TestResult p_value_permutation(const CenteredGram& Kc, const CenteredGram& Lc, int permutations,
                               std::uint64_t seed, unsigned threads) {
    if (permutations < 1) {
        throw InputError("permutation count must be at least 1");
    }
    if (Kc.size() != Lc.size()) {
        throw InputError("samples are not paired: sizes differ");
    }
    if (Kc.mode != Centering::unbiased || Lc.mode != Centering::unbiased) {
        throw InputError("the permutation test uses unbiased centering");
    }
    const Eigen::Index n = Kc.size();
    if (n < 3) {
        throw InputError("permutation test needs n >= 3");
    }

    std::vector<Eigen::Index> identity(static_cast<std::size_t>(n));
    std::iota(identity.begin(), identity.end(), Eigen::Index{0});
    // Same summation order as the permuted copies, so ties compare exactly.
    const double observed = permuted_statistic(Kc, Lc, identity);

    std::vector<double> permuted(static_cast<std::size_t>(permutations));
    parallel_for(permuted.size(), threads, [&](std::size_t b) {
        RandomStream stream(derive_seed({seed, static_cast<std::uint64_t>(b + 1)}));
        std::vector<Eigen::Index> order = identity;
        stream.shuffle(std::span<Eigen::Index>(order));
        permuted[b] = permuted_statistic(Kc, Lc, order);
    });

    PermutationDetail detail;
    detail.permutations = permutations;
    detail.seed = seed;
    detail.exceed_count = static_cast<int>(
        std::count_if(permuted.begin(), permuted.end(), [observed](double t) { return t >= observed; }));

    TestResult result;
    result.method = Method::permutation;
    result.statistic = observed;
    result.n = n;
    result.p_value = permutation_p_value(observed, permuted);
    result.detail = detail;
    return result;
}

TestResult p_value_permutation(const Sample& x, const Sample& y, const KernelConfig& kx,
                               const KernelConfig& ky, int permutations, std::uint64_t seed,
                               unsigned threads) {
    TestOptions opts;
    opts.method = Method::permutation;
    opts.kernel_x = kx;
    opts.kernel_y = ky;
    opts.permutations = permutations;
    opts.seed = seed;
    opts.threads = threads;
    return independence_test(x, y, opts);
}

TestResult independence_test(const Sample& x, const Sample& y, const TestOptions& opts) {
    if (x.size() != y.size()) {
        throw InputError("samples are not paired: x has " + std::to_string(x.size()) +
                         " observations, y has " + std::to_string(y.size()));
    }
    if (x.size() < 3) {
        throw InputError("independence test needs n >= 3");
    }
    if (opts.method == Method::permutation && opts.permutations < 1) {
        throw InputError("permutation count must be at least 1");
    }
    const GramMatrix K = gram(x, opts.kernel_x);
    const GramMatrix L = gram(y, opts.kernel_y);

    TestResult result;
    switch (opts.method) {
        case Method::new_chi_sq: {
            const CenteredGram Kc = center_unbiased(K);
            const CenteredGram Lc = center_unbiased(L);
            result = p_value_new(statistic(Kc, Lc), cumulants(Kc), cumulants(Lc));
            break;
        }
        case Method::gamma: {
            const CenteredGram Kc = center_biased(K);
            const CenteredGram Lc = center_biased(L);
            result = p_value_gamma(statistic(Kc, Lc), gamma_moments(K.values, L.values, Kc, Lc));
            break;
        }
        case Method::permutation: {
            result = p_value_permutation(center_unbiased(K), center_unbiased(L), opts.permutations,
                                         opts.seed, opts.threads);
            break;
        }
    }
    result.sigma2_x = K.sigma2;
    result.sigma2_y = L.sigma2;
    return result;
}

}  // namespace hsic
