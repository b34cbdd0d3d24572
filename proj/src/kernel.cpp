#include "hsic/kernel.hpp"

#include "hsic/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace hsic {

namespace {

void require_finite(const RowMatrix& data, const char* what) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (!std::isfinite(data(i, j))) {
                throw InputError(std::string(what) + ": non-finite value at row " +
                                 std::to_string(i + 1) + ", column " + std::to_string(j + 1));
            }
        }
    }
}

void require_increasing_grid(std::span<const double> grid) {
    if (grid.size() < 2) {
        throw InputError("functional data need at least 2 grid points");
    }
    for (std::size_t r = 0; r < grid.size(); ++r) {
        if (!std::isfinite(grid[r])) {
            throw InputError("grid: non-finite time point at position " + std::to_string(r + 1));
        }
        if (r > 0 && !(grid[r] > grid[r - 1])) {
            throw InputError("grid: non-increasing time point at position " +
                             std::to_string(r + 1));
        }
    }
}

// w_r such that sum_r w_r f_r equals the composite trapezoid rule.
Vector trapezoid_weights(const Vector& grid) {
    const Eigen::Index k = grid.size();
    Vector w = Vector::Zero(k);
    for (Eigen::Index r = 1; r < k; ++r) {
        const double half = 0.5 * (grid[r] - grid[r - 1]);
        w[r - 1] += half;
        w[r] += half;
    }
    return w;
}

}  // namespace

Sample::Sample(SampleKind kind, RowMatrix data, Vector grid)
    : kind_(kind), data_(std::move(data)), grid_(std::move(grid)) {
    if (kind_ == SampleKind::functional) {
        weights_ = trapezoid_weights(grid_);
    }
}

Sample Sample::vectors(RowMatrix data) {
    if (data.rows() < 1 || data.cols() < 1) {
        throw InputError("sample needs at least one observation and one coordinate");
    }
    require_finite(data, "sample");
    return Sample(SampleKind::vector, std::move(data), Vector());
}

Sample Sample::curves(RowMatrix values, Vector grid) {
    if (values.rows() < 1) {
        throw InputError("sample needs at least one curve");
    }
    require_increasing_grid({grid.data(), static_cast<std::size_t>(grid.size())});
    if (values.cols() != grid.size()) {
        throw InputError("curves have " + std::to_string(values.cols()) +
                         " values but the grid has " + std::to_string(grid.size()) + " points");
    }
    require_finite(values, "sample");
    return Sample(SampleKind::functional, std::move(values), std::move(grid));
}

Sample Sample::curves_on_unit_grid(RowMatrix values) {
    const Eigen::Index k = values.cols();
    if (k < 2) {
        throw InputError("functional data need at least 2 grid points");
    }
    Vector grid(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        grid[r] = static_cast<double>(r) / static_cast<double>(k - 1);
    }
    return curves(std::move(values), std::move(grid));
}

Sample Sample::permuted(std::span<const Eigen::Index> order) const {
    if (static_cast<Eigen::Index>(order.size()) != size()) {
        throw InputError("permutation length does not match the sample size");
    }
    RowMatrix out(data_.rows(), data_.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = data_.row(order[i]);
    }
    return Sample(kind_, std::move(out), grid_);
}

Sample Sample::scaled(double factor) const {
    return Sample(kind_, data_ * factor, grid_);
}

KernelConfig KernelConfig::fixed(double sigma2) {
    if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
        throw InputError("kernel width must be positive and finite");
    }
    return KernelConfig{sigma2};
}

double functional_sq_norm(std::span<const double> values, std::span<const double> grid) {
    require_increasing_grid(grid);
    if (values.size() != grid.size()) {
        throw InputError("curve and grid lengths differ");
    }
    double acc = 0.0;
    for (std::size_t r = 1; r < grid.size(); ++r) {
        acc += (grid[r] - grid[r - 1]) * (values[r] * values[r] + values[r - 1] * values[r - 1]) / 2.0;
    }
    return acc;
}

Matrix pairwise_sq_dist(const Sample& s) {
    const Eigen::Index n = s.size();
    const Eigen::Index p = s.dim();
    const RowMatrix& x = s.data();
    const bool functional = s.kind() == SampleKind::functional;
    const double* w = functional ? s.weights_.data() : nullptr;

    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* xi = x.row(i).data();
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double* xj = x.row(j).data();
            double acc = 0.0;
            if (functional) {
                for (Eigen::Index c = 0; c < p; ++c) {
                    const double diff = xi[c] - xj[c];
                    acc += w[c] * diff * diff;
                }
            } else {
                for (Eigen::Index c = 0; c < p; ++c) {
                    const double diff = xi[c] - xj[c];
                    acc += diff * diff;
                }
            }
            d(i, j) = acc;
            d(j, i) = acc;
        }
    }
    return d;
}

double select_width(const Matrix& sq_dist) {
    const Eigen::Index n = sq_dist.rows();
    if (n < 2) {
        throw InputError("kernel width selection needs at least 2 observations");
    }
    std::vector<double> upper;
    upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            upper.push_back(sq_dist(i, j));
        }
    }
    const std::size_t m = upper.size();
    const auto mid = upper.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(upper.begin(), mid, upper.end());
    double median = *mid;
    if (m % 2 == 0) {
        const double lower = *std::max_element(upper.begin(), mid);
        median = 0.5 * (lower + median);
    }
    if (!(median > 0.0)) {
        // Over half the pairs coincide: use the smallest positive distance.
        const auto positive = std::find_if(upper.begin(), upper.end(), [](double v) { return v > 0.0; });
        if (positive == upper.end()) {
            throw DegenerateError("all observations are identical; kernel width is undefined");
        }
        double smallest = *positive;
        for (double v : upper) {
            if (v > 0.0) smallest = std::min(smallest, v);
        }
        median = smallest;
    }
    return median / 2.0;
}

double select_width(const Sample& s) { return select_width(pairwise_sq_dist(s)); }

GramMatrix gram(const Sample& s, const KernelConfig& cfg) {
    const Eigen::Index n = s.size();
    if (n == 1) {
        if (!cfg.sigma2) {
            throw InputError("kernel width selection needs at least 2 observations");
        }
        return GramMatrix{Matrix::Ones(1, 1), *cfg.sigma2};
    }
    Matrix d = pairwise_sq_dist(s);
    const double sigma2 = cfg.sigma2 ? *cfg.sigma2 : select_width(d);
    const double scale = -1.0 / (2.0 * sigma2);
    for (Eigen::Index j = 0; j < n; ++j) {
        d(j, j) = 1.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double k = std::exp(scale * d(i, j));
            d(i, j) = k;
            d(j, i) = k;
        }
    }
    return GramMatrix{std::move(d), sigma2};
}

}  // namespace hsic
