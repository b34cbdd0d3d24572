#pragma once

#include "hsic/centering.hpp"

namespace hsic {

enum class StatisticKind { new_unbiased, gretton_biased };

struct StatisticValue {
    double value = 0.0;
    StatisticKind kind = StatisticKind::new_unbiased;
    Eigen::Index n = 0;
};

/// Estimates (c1, c2, c3) of E[Kc(x,x)], E[Kc(x,x')^2] and
/// E[Kc(x,x')Kc(x',x'')Kc(x'',x)] for one centered Gram matrix.
struct CumulantEstimates {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    Eigen::Index n = 0;
};

/// n^-1 tr(Kc Lc), computed as the entrywise-product sum. Both inputs must
/// share size and centering mode; the mode picks the statistic kind.
StatisticValue statistic(const CenteredGram& Kc, const CenteredGram& Lc);

/// Point estimate of HSIC: the statistic divided by n.
inline double hsic_estimate(const StatisticValue& stat) {
    return stat.value / static_cast<double>(stat.n);
}

/// Trace formulas, with A the centered Gram and o the entrywise product:
///
///   c1 = tr(A) / n
///   c2 = [tr(A^2) - tr(A o A)] / (n(n-1))
///   c3 = [tr(A^3) - 3 tr(diag(A) A^2) + 2 tr(A o A o A)] / (n(n-1)(n-2))
///
/// c2 and c3 average over distinct index pairs and triples. The cost is one
/// dense product, O(n^3). Requires n >= 3.
CumulantEstimates cumulants(const CenteredGram& Cc);

/// c2 alone, in O(n^2). Requires n >= 2.
double second_cumulant(const CenteredGram& Cc);

}  // namespace hsic
