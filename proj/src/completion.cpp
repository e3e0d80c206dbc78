#include "unshuffle/completion.hpp"

#include <stdexcept>

namespace unshuffle {

soft_impute_result soft_impute(const masked_matrix& x, double lam, double tol, int max_iter,
                               const std::optional<dense_matrix>& init) {
    if (lam < 0) throw std::invalid_argument("soft_impute: negative lambda");
    if (tol <= 0) throw std::invalid_argument("soft_impute: tol must be positive");
    soft_impute_result res;
    res.m_hat = init ? *init : dense_matrix::Zero(x.rows(), x.cols());
    const dense_matrix observed = mask_project(x, false);
    for (int it = 1; it <= max_iter; ++it) {
        const dense_matrix imputed = observed + res.m_hat.cwiseProduct((1.0 - x.mask.array()).matrix());
        dense_matrix next = prox_nuclear(imputed, lam);
        const double denom = std::max(1.0, res.m_hat.norm());
        const double resid = (next - res.m_hat).norm() / denom;
        res.m_hat = std::move(next);
        res.iterations = it;
        if (resid <= tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

soft_impute_result soft_impute_path(const masked_matrix& x, const std::vector<double>& lambdas, double tol,
                                    int max_iter_per_lambda, const std::optional<dense_matrix>& init) {
    if (lambdas.empty()) throw std::invalid_argument("soft_impute_path: empty lambda path");
    soft_impute_result res;
    std::optional<dense_matrix> carry = init;
    for (double lam : lambdas) {
        res = soft_impute(x, lam, tol, max_iter_per_lambda, carry);
        carry = res.m_hat;
    }
    return res;
}

}  // namespace unshuffle
