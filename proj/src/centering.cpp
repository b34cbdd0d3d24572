#include "hsic/centering.hpp"

#include "hsic/error.hpp"

namespace hsic {

namespace {

// Neumaier-compensated sum so long rows do not drift.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Margins {
    Vector row;
    Vector col;
    double total = 0.0;
};

Margins margins(const Matrix& K) {
    const Eigen::Index n = K.rows();
    Margins m{Vector(n), Vector(n), 0.0};
    CompensatedSum total;
    for (Eigen::Index j = 0; j < n; ++j) {
        CompensatedSum col;
        for (Eigen::Index i = 0; i < n; ++i) {
            col.add(K(i, j));
        }
        m.col[j] = col.value();
        total.add(m.col[j]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        CompensatedSum row;
        for (Eigen::Index j = 0; j < n; ++j) {
            row.add(K(i, j));
        }
        m.row[i] = row.value();
    }
    m.total = total.value();
    return m;
}

void require_square(const Matrix& K) {
    if (K.rows() != K.cols()) {
        throw InputError("Gram matrix must be square");
    }
}

}  // namespace

CenteredGram center_unbiased(const Matrix& K) {
    require_square(K);
    const Eigen::Index n = K.rows();
    if (n < 2) {
        throw InputError("unbiased centering needs n >= 2");
    }
    const Margins m = margins(K);
    const double nm1 = static_cast<double>(n - 1);
    const double offdiag_mean = (m.total - K.trace()) / (static_cast<double>(n) * nm1);

    Vector row_term(n);
    Vector col_term(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        row_term[i] = (m.row[i] - K(i, i)) / nm1;
        col_term[i] = (m.col[i] - K(i, i)) / nm1;
    }

    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = K(i, j) - row_term[i] - col_term[j] + offdiag_mean;
        }
    }
    return CenteredGram{std::move(out), Centering::unbiased};
}

CenteredGram center_biased(const Matrix& K) {
    require_square(K);
    const Eigen::Index n = K.rows();
    if (n < 1) {
        throw InputError("biased centering needs n >= 1");
    }
    const Margins m = margins(K);
    const double nd = static_cast<double>(n);
    const Vector row_mean = m.row / nd;
    const Vector col_mean = m.col / nd;
    const double grand_mean = m.total / (nd * nd);

    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = K(i, j) - row_mean[i] - col_mean[j] + grand_mean;
        }
    }
    return CenteredGram{std::move(out), Centering::biased};
}

}  // namespace hsic
