#include "hsic/statistic.hpp"

#include "hsic/error.hpp"

#include <cmath>
#include <string>

namespace hsic {

namespace {

constexpr double kNegativeC2Slack = 1e-14;

double clamp_c2(double c2) {
    if (c2 >= 0.0) return c2;
    if (c2 >= -kNegativeC2Slack) return 0.0;
    throw NumericError("second cumulant estimate is negative (" + std::to_string(c2) + ")");
}

}  // namespace

StatisticValue statistic(const CenteredGram& Kc, const CenteredGram& Lc) {
    if (Kc.size() != Lc.size() || Kc.values.cols() != Lc.values.cols()) {
        throw InputError("centered Gram matrices differ in size");
    }
    if (Kc.mode != Lc.mode) {
        throw InputError("centered Gram matrices use different centering modes");
    }
    const Eigen::Index n = Kc.size();
    if (n < 2) {
        throw InputError("statistic needs n >= 2");
    }
    const double trace = Kc.values.cwiseProduct(Lc.values).sum();
    const StatisticKind kind = Kc.mode == Centering::unbiased ? StatisticKind::new_unbiased
                                                               : StatisticKind::gretton_biased;
    return StatisticValue{trace / static_cast<double>(n), kind, n};
}

double second_cumulant(const CenteredGram& Cc) {
    const Matrix& A = Cc.values;
    const Eigen::Index n = A.rows();
    if (n < 2) {
        throw InputError("second cumulant needs n >= 2");
    }
    const double nd = static_cast<double>(n);
    const double tr_sq = A.squaredNorm();                  // tr(A^2), A symmetric
    const double tr_hadamard = A.diagonal().squaredNorm();  // tr(A o A)
    return clamp_c2((tr_sq - tr_hadamard) / (nd * (nd - 1.0)));
}

CumulantEstimates cumulants(const CenteredGram& Cc) {
    const Matrix& A = Cc.values;
    const Eigen::Index n = A.rows();
    if (n < 3) {
        throw InputError("cumulant estimates need n >= 3");
    }
    const double nd = static_cast<double>(n);
    const Vector diag = A.diagonal();

    Matrix A2;
    A2.noalias() = A * A;
    const double tr_cube = A.cwiseProduct(A2.transpose()).sum();
    const double tr_diag_sq = diag.dot(A2.diagonal());
    const double tr_hadamard3 = diag.array().cube().sum();

    CumulantEstimates est;
    est.n = n;
    est.c1 = diag.sum() / nd;
    est.c2 = second_cumulant(Cc);
    est.c3 = (tr_cube - 3.0 * tr_diag_sq + 2.0 * tr_hadamard3) / (nd * (nd - 1.0) * (nd - 2.0));
    if (!std::isfinite(est.c1) || !std::isfinite(est.c2) || !std::isfinite(est.c3)) {
        throw NumericError("non-finite cumulant estimate");
    }
    return est;
}

}  // namespace hsic
