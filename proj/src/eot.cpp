#include "unshuffle/eot.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace unshuffle {

cost_matrix masked_pair_cost(const dense_matrix& mhat_b, const masked_matrix& b_obs) {
    if (mhat_b.rows() != b_obs.rows() || mhat_b.cols() != b_obs.cols())
        throw std::invalid_argument("masked_pair_cost: shape mismatch");
    // C(i,j) = sum_{j'' in Omega_j} Mhat(i,j'')^2 - 2 Mhat(i,j'') Bo(j,j'') + Bo(j,j'')^2,
    // assembled from three products with the 0/1 mask.
    const dense_matrix bw = b_obs.data.cwiseProduct(b_obs.mask);
    const Eigen::VectorXd row_sq = bw.cwiseProduct(bw).rowwise().sum();
    cost_matrix c = mhat_b.cwiseProduct(mhat_b) * b_obs.mask.transpose();
    c.noalias() -= 2.0 * mhat_b * bw.transpose();
    c.rowwise() += row_sq.transpose();
    return c.cwiseMax(0.0);  // clip tiny negative round-off
}

double soft_min(const Eigen::VectorXd& z, double eps) {
    if (z.size() == 0) throw std::invalid_argument("soft_min: empty input");
    if (eps <= 0) throw std::invalid_argument("soft_min: eps must be positive");
    const double m = z.minCoeff();
    const double s = ((-(z.array() - m)) / eps).exp().sum();
    return m - eps * std::log(s);
}

namespace {

// alpha_i <- softmin_j(C(i,j) - beta_j) rowwise, vectorized.
void update_alpha(const cost_matrix& c, const Eigen::VectorXd& beta, double eps, Eigen::VectorXd& alpha) {
    const auto z = c.array().rowwise() - beta.transpose().array();
    const Eigen::VectorXd m = z.rowwise().minCoeff();
    const Eigen::VectorXd s =
        ((-(z.colwise() - m.array())) / eps).exp().rowwise().sum();
    alpha = m.array() - eps * s.array().log();
}

void update_beta(const cost_matrix& c, const Eigen::VectorXd& alpha, double eps, Eigen::VectorXd& beta) {
    const auto z = c.array().colwise() - alpha.array();
    const Eigen::VectorXd m = z.colwise().minCoeff();
    const Eigen::VectorXd s =
        ((-(z.rowwise() - m.transpose().array())) / eps).exp().colwise().sum();
    beta = m.array() - eps * s.array().log();
}

}  // namespace

sinkhorn_result sinkhorn_log(const cost_matrix& c, double eps_ent, double eps_tol, int max_iter,
                             const std::optional<dual_potentials>& warm) {
    if (eps_ent <= 0) throw std::invalid_argument("sinkhorn_log: eps_ent must be positive");
    if (max_iter < 1) throw std::invalid_argument("sinkhorn_log: max_iter must be >= 1");
    const Eigen::Index n = c.rows();
    if (c.cols() != n) throw std::invalid_argument("sinkhorn_log: cost must be square");
    sinkhorn_result res;
    // Literal cold start uses constant potentials; warm start reuses duals.
    res.duals.alpha = warm ? warm->alpha : Eigen::VectorXd::Ones(n);
    res.duals.beta = warm ? warm->beta : Eigen::VectorXd::Ones(n);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int it = 1; it <= max_iter; ++it) {
        update_alpha(c, res.duals.beta, eps_ent, res.duals.alpha);
        update_beta(c, res.duals.alpha, eps_ent, res.duals.beta);
        if (!res.duals.alpha.allFinite() || !res.duals.beta.allFinite())
            throw std::runtime_error("sinkhorn_log: non-finite dual at iteration " + std::to_string(it));
        res.plan = plan_from_duals(c, res.duals, eps_ent);
        res.iterations = it;
        const double resid = inv_sqrt_n * (res.plan.rowwise().sum().array() - 1.0).matrix().norm();
        if (resid <= eps_tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

double dual_objective(const cost_matrix& c, const dual_potentials& duals, double eps_ent) {
    if (eps_ent <= 0) throw std::invalid_argument("dual_objective: eps_ent must be positive");
    const auto e = ((duals.alpha.rowwise().replicate(c.cols()).array() +
                     duals.beta.transpose().colwise().replicate(c.rows()).array() - c.array()) /
                    eps_ent);
    const double m = e.maxCoeff();
    const double lse = m + std::log((e - m).exp().sum());
    return duals.alpha.sum() + duals.beta.sum() - eps_ent * std::exp(lse);
}

transport_plan plan_from_duals(const cost_matrix& c, const dual_potentials& duals, double eps_ent) {
    if (eps_ent <= 0) throw std::invalid_argument("plan_from_duals: eps_ent must be positive");
    auto e = ((duals.alpha.rowwise().replicate(c.cols()).array() +
               duals.beta.transpose().colwise().replicate(c.rows()).array() - c.array()) /
              eps_ent);
    // Converged duals keep exponents near zero; the clamp only guards
    // non-converged inputs against overflow.
    return e.min(46.0).exp().matrix();
}

dense_matrix grad_entropic(const dense_matrix& mhat_b, const masked_matrix& b_obs, const transport_plan& plan) {
    if (mhat_b.rows() != b_obs.rows() || mhat_b.cols() != b_obs.cols())
        throw std::invalid_argument("grad_entropic: shape mismatch");
    if (plan.rows() != mhat_b.rows() || plan.cols() != b_obs.rows())
        throw std::invalid_argument("grad_entropic: plan shape mismatch");
    // grad = 2 [ Mhat ∘ (P W) - P (B_o ∘ W) ] with W the 0/1 mask.
    const dense_matrix pw = plan * b_obs.mask;
    dense_matrix g = mhat_b.cwiseProduct(pw);
    g.noalias() -= plan * b_obs.data.cwiseProduct(b_obs.mask);
    return 2.0 * g;
}

}  // namespace unshuffle
