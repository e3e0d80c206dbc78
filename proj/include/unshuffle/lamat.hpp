#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace unshuffle {

using dense_matrix = Eigen::MatrixXd;

// Thin SVD X = U diag(sigma) V^T with sigma non-increasing.
struct svd_factors {
    dense_matrix u;
    Eigen::VectorXd sigma;
    dense_matrix v;
};

// Dense values plus the observed-index set Omega, kept as a 0/1 matrix of the
// same shape.  Unobserved entries of `data` carry no meaning.
struct masked_matrix {
    dense_matrix data;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic> mask;  // 0 or 1

    masked_matrix() = default;
    masked_matrix(dense_matrix d, dense_matrix m);

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index cols() const { return data.cols(); }
    std::ptrdiff_t observed_count() const { return static_cast<std::ptrdiff_t>(mask.sum() + 0.5); }
    masked_matrix block(Eigen::Index col0, Eigen::Index width) const;
};

svd_factors svd(const dense_matrix& x);

double nuclear_norm(const dense_matrix& x);

// Singular-value soft threshold: U max(sigma - lam, 0) V^T; the minimizer of
// (1/2)||X - M||_F^2 + lam ||M||_*.
dense_matrix prox_nuclear(const dense_matrix& x, double lam);

// P_Omega(X) (complement=false) or its complement P_Omega^perp(X); the two add
// back to X.data.
dense_matrix mask_project(const masked_matrix& x, bool complement);

// Count of singular values above 1e-8 * sigma_1 (relative cutoff).
int numeric_rank(const dense_matrix& x, double rel_tol = 1e-8);

}  // namespace unshuffle
