#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace hsic {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class SampleKind { vector, functional };

/// A sample of n observations stored one per row. Vector samples hold
/// p coordinates per row; functional samples hold k curve values per row,
/// evaluated on a shared strictly increasing time grid.
class Sample {
public:
    /// Validates shape and finiteness; throws InputError on violation.
    static Sample vectors(RowMatrix data);
    static Sample curves(RowMatrix values, Vector grid);

    /// Same layout as `curves` on the unit grid t_r = (r-1)/(k-1).
    static Sample curves_on_unit_grid(RowMatrix values);

    SampleKind kind() const noexcept { return kind_; }
    Eigen::Index size() const noexcept { return data_.rows(); }
    Eigen::Index dim() const noexcept { return data_.cols(); }
    const RowMatrix& data() const noexcept { return data_; }
    const Vector& grid() const noexcept { return grid_; }

    /// Rows reordered so that row i of the result is row order[i] of this.
    Sample permuted(std::span<const Eigen::Index> order) const;

    /// The same observations with every value multiplied by `factor`.
    Sample scaled(double factor) const;

private:
    Sample(SampleKind kind, RowMatrix data, Vector grid);

    SampleKind kind_;
    RowMatrix data_;
    Vector grid_;
    Vector weights_;  // trapezoid weights, functional kind only

    friend Matrix pairwise_sq_dist(const Sample& s);
};

/// Kernel width. An empty `sigma2` means "select from the data".
struct KernelConfig {
    std::optional<double> sigma2;

    static KernelConfig automatic() { return {}; }
    static KernelConfig fixed(double sigma2);
};

/// Gaussian RBF Gram matrix K[i][j] = exp(-|x_i - x_j|^2 / (2 sigma2)).
struct GramMatrix {
    Matrix values;
    double sigma2 = 0.0;

    Eigen::Index size() const noexcept { return values.rows(); }
};

/// Trapezoidal approximation of the integral of x(t)^2 over the grid span.
double functional_sq_norm(std::span<const double> values, std::span<const double> grid);

/// Squared distances between every pair of observations: Euclidean for
/// vectors, trapezoidal L2 for curves. Symmetric with an exact zero diagonal.
Matrix pairwise_sq_dist(const Sample& s);

/// Median of the off-diagonal squared distances divided by two, so the
/// median pair sits at kernel exponent -1. Throws DegenerateError when
/// every pair coincides.
double select_width(const Sample& s);
double select_width(const Matrix& sq_dist);

GramMatrix gram(const Sample& s, const KernelConfig& cfg);

}  // namespace hsic
