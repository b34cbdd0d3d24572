#pragma once

#include "hsic/kernel.hpp"

namespace hsic {

enum class Centering { unbiased, biased };

/// A Gram matrix with its feature-space mean removed, tagged with the
/// estimator used to remove it.
struct CenteredGram {
    Matrix values;
    Centering mode = Centering::unbiased;

    Eigen::Index size() const noexcept { return values.rows(); }
};

/// Unbiased centering: each entry loses the leave-self-out row and column
/// means and regains the off-diagonal grand mean,
///
///   K*[i][j] = K[i][j] - sum_{v!=i} K[i][v]/(n-1) - sum_{u!=j} K[u][j]/(n-1)
///              + sum_{u!=v} K[u][v]/(n(n-1)).
///
/// O(n^2) from precomputed row sums, column sums and the total. Requires n >= 2.
CenteredGram center_unbiased(const Matrix& K);
inline CenteredGram center_unbiased(const GramMatrix& K) { return center_unbiased(K.values); }

/// Biased (H K H) centering with H = I - J/n, evaluated entrywise as
/// K[i][j] - rowmean_i - colmean_j + grandmean. Requires n >= 1.
CenteredGram center_biased(const Matrix& K);
inline CenteredGram center_biased(const GramMatrix& K) { return center_biased(K.values); }

inline CenteredGram center(const GramMatrix& K, Centering mode) {
    return mode == Centering::unbiased ? center_unbiased(K) : center_biased(K);
}

}  // namespace hsic
