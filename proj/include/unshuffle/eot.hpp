#pragma once

#include <optional>

#include "unshuffle/lamat.hpp"

namespace unshuffle {

using cost_matrix = dense_matrix;
using transport_plan = dense_matrix;

struct dual_potentials {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
};

struct sinkhorn_result {
    dual_potentials duals;
    transport_plan plan;
    int iterations = 0;
    bool converged = false;
};

// Pairing cost C(i,j) = sum over observed columns j'' of B_obs row j of
// (Mhat_B(i,j'') - B_o(j,j''))^2.
cost_matrix masked_pair_cost(const dense_matrix& mhat_b, const masked_matrix& b_obs);

// min z - eps * log sum exp(-(z - min z)/eps); stable for large magnitudes.
double soft_min(const Eigen::VectorXd& z, double eps);

// Log-domain Sinkhorn on uniform marginals.  One iteration = alpha update then
// beta update; convergence checked after the beta update on the row-marginal
// residual (1/sqrt(n)) * ||P 1 - 1||_2 <= eps_tol (columns are exact there).
sinkhorn_result sinkhorn_log(const cost_matrix& c, double eps_ent, double eps_tol, int max_iter,
                             const std::optional<dual_potentials>& warm = std::nullopt);

// <1,alpha> + <1,beta> - eps <1, exp((alpha ⊕ beta - C)/eps)>, log-domain.
double dual_objective(const cost_matrix& c, const dual_potentials& duals, double eps_ent);

// Entrywise exp((alpha_i + beta_j - C_ij)/eps) without overflow.
transport_plan plan_from_duals(const cost_matrix& c, const dual_potentials& duals, double eps_ent);

// d/dMhat_B of the dual objective at fixed duals:
// grad(i,j'') = sum_j plan(i,j) * 2 (Mhat_B(i,j'') - B_o(j,j'')) * [(j,j'') in Omega].
dense_matrix grad_entropic(const dense_matrix& mhat_b, const masked_matrix& b_obs, const transport_plan& plan);

}  // namespace unshuffle
