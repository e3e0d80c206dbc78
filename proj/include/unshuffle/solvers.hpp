#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "unshuffle/eot.hpp"
#include "unshuffle/lamat.hpp"
#include "unshuffle/perm.hpp"

namespace unshuffle {

// Column layout: anchor block of width m_a, then d permutable blocks.
struct block_partition {
    int m_a = 0;
    std::vector<int> widths;

    int d() const { return static_cast<int>(widths.size()); }
    int total_cols() const;
    int offset(int l) const;  // first column of permutable block l
    void validate(Eigen::Index cols) const;
};

// Regularizer path: a fixed value, or start / decrement / floor driven by a
// stall counter with the given patience.
struct lambda_schedule {
    bool is_fixed = true;
    double value = 0.5;
    double start = 0.0;
    double decrement = 0.0;
    double floor = 0.0;
    int patience = 0;

    static lambda_schedule fixed(double v);
    static lambda_schedule stepped(double start, double decrement, double floor, int patience);
    double initial() const { return is_fixed ? value : start; }
};

enum class init_strategy { gaussian, spectral_rank1, provided };

struct solver_config {
    double omega = 3.0;               // stepsize exponent
    int outer_iters = 1000;           // N
    int patience = 100;               // K: entropy halving after K stalls
    double eps_ent_init = 0.1;
    double eps_tol = 0.01;
    int sinkhorn_max_iter = 10000;
    lambda_schedule lambda_sched{};
    double step_cap = 0.5;
    std::uint64_t seed = 0;
    init_strategy init = init_strategy::gaussian;
    std::optional<double> rho_fixed;  // overrides the adaptive stepsize
    bool eps_scale_from_cost = true;  // entropy coefficient is relative to the mean initial pairing cost
    double stall_rel_tol = 1e-4;      // relative improvement below this counts as a stalled step
    int anneal_burn_in = 0;           // outer iterations before entropy halving may fire
    std::optional<double> anneal_omega;  // stepsize exponent once halving is active (default: omega)
    bool warm_start_duals = false;    // literal mode re-initializes duals each outer iteration
    bool prox_scaled_by_rho = false;  // textbook rho*lambda threshold, for comparison
    bool stepsize_col_max = false;    // alternative c_k reading (column-wise maxima)
    std::optional<dense_matrix> init_matrix;   // used when init == provided
    std::vector<permutation> forced_plans;     // freeze plans to these permutations (oracle mode)
    int baseline_inner_iters = 20;    // soft-impute steps per baseline alternation
};

struct recovery_result {
    dense_matrix m_hat;
    std::vector<transport_plan> plans;
    std::vector<permutation> rounded_perms;
    std::vector<double> objective_trace;  // anchor fit + transport + lambda*nuclear (entropy-free)
    std::vector<double> stepsize_trace;   // mean rho over blocks
    std::vector<double> entropy_trace;    // eps_ent per iteration
    std::vector<double> lambda_trace;     // lambda per iteration
    std::vector<std::vector<int>> low_confidence;  // per block: rows with empty observed sets
    bool converged = false;

    // Metrics, filled by the experiment harness when ground truth is known.
    std::vector<int> metric_d_hamming;
    double metric_norm_perm_err = -1.0;
    double metric_rmse_train = -1.0;
    double metric_rmse_test = -1.0;
};

struct stepsize_stats {
    double rho = 0.0;
    double delta = 0.0;
    double c = 0.0;
};

// rho = min(step_cap, (1 - delta_k)(1 - c_k)^omega) with
// delta_k = ||P_prev - P_cur||_F^2 / (2n) and c_k = ||rowmax(P_cur) - 1||_1 / n
// (column-wise maxima instead when col_max is set).
stepsize_stats adaptive_stepsize(const transport_plan& plan_prev, const transport_plan& plan_cur, double omega,
                                 double step_cap, bool col_max = false);

// Exact linear assignment (Jonker-Volgenant style shortest augmenting paths):
// minimizes sum_i C(i, sigma(i)); deterministic smallest-index tie-break.
std::pair<permutation, double> lap_solve(const cost_matrix& c);

// Pairing-cost/gradient hook for scenarios whose permuted items are not rows
// of a column block (e.g. shuffled image tiles).  When present, the partition
// is ignored and anchor imputation uses the full observed mask.
struct cost_provider {
    virtual ~cost_provider() = default;
    virtual int block_count() const = 0;
    virtual int items(int block) const = 0;
    virtual cost_matrix cost(const dense_matrix& m_hat, int block) const = 0;
    virtual void apply_gradient(dense_matrix& m_hat, int block, const transport_plan& plan, double rho) const = 0;
};

// Min-max recovery with adaptive stepsize and decaying entropy: per outer
// iteration and block, build the masked pairing cost, run the Sinkhorn
// max-oracle, take a plan-weighted gradient step; then impute the anchor and
// apply the nuclear prox; schedules advance on stalls of the monitored
// entropy-free objective.
recovery_result solve_m3o(const masked_matrix& obs, const block_partition& part, const solver_config& cfg,
                          const cost_provider* provider = nullptr);

// Alternating exact assignment + soft-impute; terminates at a permutation
// fixed point.
recovery_result solve_baseline(const masked_matrix& obs, const block_partition& part, const solver_config& cfg);

// Per-block regression-based recovery: soft-impute pre-fill, then alternate
// least-squares W with exact assignment on ||A(i) - (BW)(j)||^2.
recovery_result solve_mus(const masked_matrix& obs, const block_partition& part, const solver_config& cfg);

// Entropy-free objective at explicit permutations: anchor fit + assignment
// transport cost + lam * nuclear norm.  Shared by solvers and the harness.
double assignment_objective(const dense_matrix& m_hat, const masked_matrix& obs, const block_partition& part,
                            const std::vector<permutation>& perms, double lam);

}  // namespace unshuffle
