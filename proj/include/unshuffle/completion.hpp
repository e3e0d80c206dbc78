#pragma once

#include <optional>
#include <vector>

#include "unshuffle/lamat.hpp"

namespace unshuffle {

struct soft_impute_result {
    dense_matrix m_hat;
    int iterations = 0;
    bool converged = false;
};

// Soft-Impute: iterate X_hat <- P_Omega(X) + P_Omega_perp(M_hat), then
// M_hat <- prox_nuclear(X_hat, lam), until the relative fixed-point residual
// ||M_new - M_old||_F / max(1, ||M_old||_F) <= tol.
soft_impute_result soft_impute(const masked_matrix& x, double lam, double tol, int max_iter,
                               const std::optional<dense_matrix>& init = std::nullopt);

// Warm-started decreasing-lambda path; returns the result at the final lambda.
soft_impute_result soft_impute_path(const masked_matrix& x, const std::vector<double>& lambdas, double tol,
                                    int max_iter_per_lambda,
                                    const std::optional<dense_matrix>& init = std::nullopt);

}  // namespace unshuffle
