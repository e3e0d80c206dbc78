#include "unshuffle/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "unshuffle/completion.hpp"
#include "unshuffle/rng.hpp"

namespace unshuffle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();


dense_matrix perm_plan(const permutation& sigma) {
    const int n = sigma.size();
    dense_matrix p = dense_matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) p(i, sigma.map[static_cast<std::size_t>(i)]) = 1.0;
    return p;
}

dense_matrix gaussian_init(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    rng r(seed);
    dense_matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.gaussian();
    return m;
}

dense_matrix initial_estimate(const masked_matrix& obs, const solver_config& cfg) {
    switch (cfg.init) {
        case init_strategy::gaussian:
            return gaussian_init(obs.rows(), obs.cols(), cfg.seed);
        case init_strategy::spectral_rank1: {
            const dense_matrix x0 = obs.data.cwiseProduct(obs.mask);
            const svd_factors f = svd(x0);
            if (f.sigma.size() == 0) return dense_matrix::Zero(obs.rows(), obs.cols());
            return f.sigma(0) * f.u.col(0) * f.v.col(0).transpose();
        }
        case init_strategy::provided:
            if (!cfg.init_matrix) throw std::invalid_argument("init_strategy::provided requires init_matrix");
            if (cfg.init_matrix->rows() != obs.rows() || cfg.init_matrix->cols() != obs.cols())
                throw std::invalid_argument("init_matrix shape does not match the observed matrix");
            return *cfg.init_matrix;
    }
    throw std::logic_error("unknown init_strategy");
}

// Adapter presenting the default row-of-a-column-block pairing through the
// provider interface, so the solver has a single code path.
class column_block_provider final : public cost_provider {
  public:
    column_block_provider(const masked_matrix& obs, const block_partition& part) : obs_(obs), part_(part) {}

    int block_count() const override { return part_.d(); }

    int items(int block) const override {
        (void)block;
        return static_cast<int>(obs_.rows());
    }

    cost_matrix cost(const dense_matrix& m_hat, int block) const override {
        const int off = part_.offset(block);
        const int w = part_.widths[static_cast<std::size_t>(block)];
        return masked_pair_cost(m_hat.middleCols(off, w), block_obs(block));
    }

    void apply_gradient(dense_matrix& m_hat, int block, const transport_plan& plan, double rho) const override {
        const int off = part_.offset(block);
        const int w = part_.widths[static_cast<std::size_t>(block)];
        const dense_matrix g = grad_entropic(m_hat.middleCols(off, w), block_obs(block), plan);
        m_hat.middleCols(off, w) -= rho * g;
    }

    masked_matrix block_obs(int block) const {
        const int off = part_.offset(block);
        const int w = part_.widths[static_cast<std::size_t>(block)];
        return masked_matrix(obs_.data.middleCols(off, w), obs_.mask.middleCols(off, w));
    }

  private:
    const masked_matrix& obs_;
    const block_partition& part_;
};

void impute_anchor(dense_matrix& m_hat, const masked_matrix& obs, const block_partition& part, bool full_mask) {
    if (full_mask) {
        m_hat = obs.mask.cwiseProduct(obs.data) + (1.0 - obs.mask.array()).matrix().cwiseProduct(m_hat);
        return;
    }
    if (part.m_a <= 0) return;
    auto ma = obs.mask.leftCols(part.m_a);
    auto da = obs.data.leftCols(part.m_a);
    m_hat.leftCols(part.m_a) =
        ma.cwiseProduct(da) + (1.0 - ma.array()).matrix().cwiseProduct(m_hat.leftCols(part.m_a));
}

double anchor_fit(const dense_matrix& m_hat, const masked_matrix& obs, const block_partition& part, bool full_mask) {
    if (full_mask) return obs.mask.cwiseProduct(obs.data - m_hat).squaredNorm();
    if (part.m_a <= 0) return 0.0;
    return obs.mask.leftCols(part.m_a)
        .cwiseProduct(obs.data.leftCols(part.m_a) - m_hat.leftCols(part.m_a))
        .squaredNorm();
}

// Nuclear prox in place; returns the nuclear norm of the thresholded result.
double prox_nuclear_in_place(dense_matrix& m, double thr) {
    svd_factors f = svd(m);
    Eigen::VectorXd s = (f.sigma.array() - thr).max(0.0);
    m = f.u * s.asDiagonal() * f.v.transpose();
    return s.sum();
}

std::vector<int> empty_row_indices(const masked_matrix& block) {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < block.rows(); ++i)
        if (block.mask.row(i).sum() == 0.0) out.push_back(static_cast<int>(i));
    return out;
}

// Counts steps whose relative improvement stays below tol; a schedule stage
// ends once `budget` such steps accumulate without an intervening improvement.
struct stall_tracker {
    double best = kInf;
    int stalls = 0;

    // Returns true if the budget was exhausted by this observation (and resets).
    bool observe(double obj, double tol, int budget) {
        // A fresh (or freshly reset) tracker adopts the first objective as its
        // baseline; the subtraction below would otherwise produce inf - inf.
        if (!std::isfinite(best)) {
            best = obj;
            stalls = 0;
            return false;
        }
        if (obj < best - tol * (1.0 + std::abs(best))) {
            best = obj;
            stalls = 0;
            return false;
        }
        if (++stalls >= budget) {
            stalls = 0;
            return true;
        }
        return false;
    }
};

std::pair<permutation, dense_matrix> mus_block(const dense_matrix& a_fill, const dense_matrix& b_fill);

}  // namespace

int block_partition::total_cols() const { return m_a + std::accumulate(widths.begin(), widths.end(), 0); }

int block_partition::offset(int l) const {
    int off = m_a;
    for (int i = 0; i < l; ++i) off += widths[static_cast<std::size_t>(i)];
    return off;
}

void block_partition::validate(Eigen::Index cols) const {
    if (m_a < 0) throw std::invalid_argument("anchor width must be non-negative");
    for (int w : widths)
        if (w <= 0) throw std::invalid_argument("block widths must be positive");
    if (total_cols() != static_cast<int>(cols))
        throw std::invalid_argument("partition widths do not sum to the column count");
}

lambda_schedule lambda_schedule::fixed(double v) {
    lambda_schedule s;
    s.is_fixed = true;
    s.value = v;
    return s;
}

lambda_schedule lambda_schedule::stepped(double start, double decrement, double floor, int patience) {
    lambda_schedule s;
    s.is_fixed = false;
    s.start = start;
    s.decrement = decrement;
    s.floor = floor;
    s.patience = patience;
    return s;
}

stepsize_stats adaptive_stepsize(const transport_plan& plan_prev, const transport_plan& plan_cur, double omega,
                                 double step_cap, bool col_max) {
    if (plan_prev.rows() != plan_cur.rows() || plan_prev.cols() != plan_cur.cols())
        throw std::invalid_argument("plan shapes differ");
    const double n = static_cast<double>(plan_cur.rows());
    stepsize_stats st;
    st.delta = (plan_prev - plan_cur).squaredNorm() / (2.0 * n);
    Eigen::VectorXd maxima;
    if (col_max)
        maxima = plan_cur.colwise().maxCoeff().transpose();
    else
        maxima = plan_cur.rowwise().maxCoeff();
    st.c = (maxima.array() - 1.0).abs().sum() / n;
    st.rho = std::min(step_cap, (1.0 - st.delta) * std::pow(1.0 - st.c, omega));
    st.rho = std::max(st.rho, 1e-12);  // plans far outside the slow-move regime would otherwise give rho <= 0
    return st;
}

std::pair<permutation, double> lap_solve(const cost_matrix& c) {
    if (c.rows() != c.cols()) throw std::invalid_argument("assignment cost matrix must be square");
    const int n = static_cast<int>(c.rows());
    if (n == 0) return {permutation::identity(0), 0.0};
    if (!c.allFinite()) throw std::invalid_argument("assignment cost matrix has non-finite entries");

    // Shortest augmenting paths over reduced costs; strict '<' comparisons
    // make the smallest-index choice win every tie deterministically.
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = c(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    permutation sigma = permutation::identity(n);
    for (int j = 1; j <= n; ++j) sigma.map[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += c(i, sigma.map[static_cast<std::size_t>(i)]);
    return {sigma, total};
}

double assignment_objective(const dense_matrix& m_hat, const masked_matrix& obs, const block_partition& part,
                            const std::vector<permutation>& perms, double lam) {
    part.validate(obs.cols());
    if (static_cast<int>(perms.size()) != part.d())
        throw std::invalid_argument("one permutation per permutable block expected");
    const column_block_provider prov(obs, part);
    double transport = 0.0;
    for (int l = 0; l < part.d(); ++l) {
        const cost_matrix c = prov.cost(m_hat, l);
        const permutation& sigma = perms[static_cast<std::size_t>(l)];
        if (sigma.size() != static_cast<int>(c.rows()))
            throw std::invalid_argument("permutation size does not match block item count");
        for (int i = 0; i < sigma.size(); ++i) transport += c(i, sigma.map[static_cast<std::size_t>(i)]);
    }
    return anchor_fit(m_hat, obs, part, false) + transport + lam * nuclear_norm(m_hat);
}

recovery_result solve_m3o(const masked_matrix& obs, const block_partition& part, const solver_config& cfg,
                          const cost_provider* provider) {
    const bool external = provider != nullptr;
    if (!external) part.validate(obs.cols());
    const column_block_provider fallback(obs, part);
    const cost_provider& prov = external ? *provider : static_cast<const cost_provider&>(fallback);
    const int d = prov.block_count();

    recovery_result res;
    res.m_hat = initial_estimate(obs, cfg);
    res.plans.resize(static_cast<std::size_t>(d));
    res.low_confidence.resize(static_cast<std::size_t>(d));
    std::vector<dual_potentials> duals(static_cast<std::size_t>(d));
    std::vector<bool> have_duals(static_cast<std::size_t>(d), false);
    for (int l = 0; l < d; ++l) {
        const int nl = prov.items(l);
        res.plans[static_cast<std::size_t>(l)] = transport_plan::Zero(nl, nl);
        if (!external) res.low_confidence[static_cast<std::size_t>(l)] = empty_row_indices(fallback.block_obs(l));
    }
    if (!cfg.forced_plans.empty() && static_cast<int>(cfg.forced_plans.size()) != d)
        throw std::invalid_argument("forced_plans must supply one permutation per block");

    double eps = cfg.eps_ent_init;
    double lam = cfg.lambda_sched.initial();
    stall_tracker eps_stall, lam_stall;
    double mean_c = 1.0;
    // The entropy coefficient is interpreted relative to the typical pairing
    // cost, frozen at the initial estimate so the schedule stays monotone.
    std::vector<double> eps_scale(static_cast<std::size_t>(d), 1.0);

    for (int k = 0; k < cfg.outer_iters; ++k) {
        double transport = 0.0;
        double rho_sum = 0.0;
        double c_sum = 0.0;
        for (int l = 0; l < d; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            const cost_matrix c = prov.cost(res.m_hat, l);
            if (k == 0 && cfg.eps_scale_from_cost)
                eps_scale[ul] = std::max(c.mean(), std::numeric_limits<double>::min());
            transport_plan plan;
            if (!cfg.forced_plans.empty()) {
                plan = perm_plan(cfg.forced_plans[ul]);
            } else {
                std::optional<dual_potentials> warm;
                if (cfg.warm_start_duals && have_duals[ul]) warm = duals[ul];
                sinkhorn_result sr;
                try {
                    sr = sinkhorn_log(c, eps * eps_scale[ul], cfg.eps_tol, cfg.sinkhorn_max_iter, warm);
                } catch (const std::exception& e) {
                    throw std::runtime_error("max-oracle failed at outer iteration " + std::to_string(k) +
                                             ", block " + std::to_string(l) + " (eps=" + std::to_string(eps) +
                                             "): " + e.what());
                }
                duals[ul] = sr.duals;
                have_duals[ul] = true;
                plan = sr.plan;
            }
            const double omega_k =
                k >= cfg.anneal_burn_in && cfg.anneal_omega ? *cfg.anneal_omega : cfg.omega;
            const stepsize_stats st =
                adaptive_stepsize(res.plans[ul], plan, omega_k, cfg.step_cap, cfg.stepsize_col_max);
            const double rho = cfg.rho_fixed ? *cfg.rho_fixed : st.rho;
            transport += c.cwiseProduct(plan).sum();
            prov.apply_gradient(res.m_hat, l, plan, rho);
            res.plans[ul] = plan;
            rho_sum += rho;
            c_sum += st.c;
        }
        mean_c = d > 0 ? c_sum / d : 0.0;

        impute_anchor(res.m_hat, obs, part, external);
        const double nuc = prox_nuclear_in_place(res.m_hat, cfg.prox_scaled_by_rho && d > 0
                                                                ? lam * (rho_sum / d)
                                                                : lam);
        const double obj = anchor_fit(res.m_hat, obs, part, external) + transport + lam * nuc;

        res.objective_trace.push_back(obj);
        res.stepsize_trace.push_back(d > 0 ? rho_sum / d : 0.0);
        res.entropy_trace.push_back(eps);
        res.lambda_trace.push_back(lam);

        // An initial burn-in at constant entropy lets the plans equilibrate
        // before the halving schedule starts sharpening them.
        if (k >= cfg.anneal_burn_in &&
            eps_stall.observe(obj, cfg.stall_rel_tol, cfg.patience))
            eps *= 0.5;
        if (!cfg.lambda_sched.is_fixed && lam > cfg.lambda_sched.floor &&
            lam_stall.observe(obj, cfg.stall_rel_tol, cfg.lambda_sched.patience)) {
            lam = std::max(lam - cfg.lambda_sched.decrement, cfg.lambda_sched.floor);
            lam_stall.best = kInf;  // objective jumps when the regularizer drops
        }
    }

    res.rounded_perms.reserve(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l)
        res.rounded_perms.push_back(lap_solve(-res.plans[static_cast<std::size_t>(l)]).first);
    res.converged = mean_c < 0.01;  // plans effectively hard at exit
    return res;
}

recovery_result solve_baseline(const masked_matrix& obs, const block_partition& part, const solver_config& cfg) {
    part.validate(obs.cols());
    const column_block_provider prov(obs, part);
    const int d = part.d();
    const int n = static_cast<int>(obs.rows());
    const double lam = cfg.lambda_sched.is_fixed ? cfg.lambda_sched.value : cfg.lambda_sched.floor;

    recovery_result res;
    res.m_hat = initial_estimate(obs, cfg);
    res.low_confidence.resize(static_cast<std::size_t>(d));
    std::vector<permutation> perms(static_cast<std::size_t>(d), permutation::identity(n));
    for (int l = 0; l < d; ++l)
        res.low_confidence[static_cast<std::size_t>(l)] = empty_row_indices(prov.block_obs(l));

    for (int k = 0; k < cfg.outer_iters; ++k) {
        std::vector<permutation> next;
        next.reserve(static_cast<std::size_t>(d));
        for (int l = 0; l < d; ++l) next.push_back(lap_solve(prov.cost(res.m_hat, l)).first);
        const bool fixed_point = k > 0 && next == perms;
        perms = std::move(next);

        // Reassemble the unshuffled observed matrix under the current estimate.
        dense_matrix x = obs.data;
        dense_matrix xm = obs.mask;
        for (int l = 0; l < d; ++l) {
            const int off = part.offset(l);
            const int w = part.widths[static_cast<std::size_t>(l)];
            const permutation inv = perms[static_cast<std::size_t>(l)].inverse();
            x.middleCols(off, w) = apply_rows(inv, obs.data.middleCols(off, w));
            xm.middleCols(off, w) = apply_rows(inv, obs.mask.middleCols(off, w));
        }
        res.m_hat =
            soft_impute(masked_matrix(x, xm), lam, 1e-12, cfg.baseline_inner_iters, res.m_hat).m_hat;

        res.objective_trace.push_back(assignment_objective(res.m_hat, obs, part, perms, lam));
        res.stepsize_trace.push_back(0.0);
        res.entropy_trace.push_back(0.0);
        res.lambda_trace.push_back(lam);
        if (fixed_point) {
            res.converged = true;
            break;
        }
    }

    res.rounded_perms = perms;
    res.plans.reserve(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) res.plans.push_back(perm_plan(perms[static_cast<std::size_t>(l)]));
    return res;
}

namespace {

std::vector<int> argsort(const Eigen::VectorXd& v) {
    std::vector<int> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) < v(b); });
    return idx;
}

// Alternating least-squares / exact-assignment recovery for one block, with a
// moment-matching initial correspondence (match whitened row norms).
std::pair<permutation, dense_matrix> mus_block(const dense_matrix& a_fill, const dense_matrix& b_fill) {
    const int n = static_cast<int>(a_fill.rows());
    const int ma = static_cast<int>(a_fill.cols());
    const int w = static_cast<int>(b_fill.cols());
    permutation sigma = permutation::identity(n);

    const dense_matrix gb =
        b_fill.transpose() * b_fill + 1e-12 * dense_matrix::Identity(w, w);
    Eigen::LLT<dense_matrix> llt(gb);
    if (llt.info() == Eigen::Success) {
        const dense_matrix bt = llt.matrixL().solve(b_fill.transpose()).transpose();  // B L^{-T}
        Eigen::SelfAdjointEigenSolver<dense_matrix> eig(a_fill.transpose() * a_fill);
        const int t = std::min(w, ma);
        dense_matrix y(t, ma);
        for (int i = 0; i < t; ++i) {
            const int src = ma - 1 - i;  // eigenvalues come back ascending
            y.row(i) = std::sqrt(std::max(eig.eigenvalues()(src), 0.0)) * eig.eigenvectors().col(src).transpose();
        }
        const dense_matrix at = a_fill * y.completeOrthogonalDecomposition().pseudoInverse();
        const std::vector<int> ia = argsort(at.rowwise().norm());
        const std::vector<int> ib = argsort(bt.rowwise().norm());
        for (int k = 0; k < n; ++k)
            sigma.map[static_cast<std::size_t>(ia[static_cast<std::size_t>(k)])] = ib[static_cast<std::size_t>(k)];
    }

    dense_matrix bw;
    for (int it = 0; it < 50; ++it) {
        const dense_matrix b_aligned = apply_rows(sigma.inverse(), b_fill);  // row i = b_fill(sigma(i))
        const dense_matrix wmat = b_aligned.completeOrthogonalDecomposition().solve(a_fill);
        bw = b_fill * wmat;
        cost_matrix c(n, n);
        for (int i = 0; i < n; ++i)
            c.row(i) = (bw.rowwise() - a_fill.row(i)).rowwise().squaredNorm().transpose();
        permutation next = lap_solve(c).first;
        if (next == sigma) return {sigma, bw};
        sigma = next;
    }
    return {sigma, bw};
}

}  // namespace

recovery_result solve_mus(const masked_matrix& obs, const block_partition& part, const solver_config& cfg) {
    part.validate(obs.cols());
    if (part.m_a <= 0) throw std::invalid_argument("regression-based recovery requires an anchor block");
    const column_block_provider prov(obs, part);
    const int d = part.d();
    const double lam = cfg.lambda_sched.is_fixed ? cfg.lambda_sched.value : cfg.lambda_sched.floor;

    recovery_result res;
    res.m_hat = dense_matrix::Zero(obs.rows(), obs.cols());
    res.low_confidence.resize(static_cast<std::size_t>(d));
    res.converged = true;

    const masked_matrix anchor(obs.data.leftCols(part.m_a), obs.mask.leftCols(part.m_a));
    const dense_matrix a_fill = soft_impute(anchor, lam, 1e-4, 200).m_hat;
    res.m_hat.leftCols(part.m_a) = a_fill;

    for (int l = 0; l < d; ++l) {
        const std::size_t ul = static_cast<std::size_t>(l);
        const int off = part.offset(l);
        const int w = part.widths[ul];
        res.low_confidence[ul] = empty_row_indices(prov.block_obs(l));
        const dense_matrix b_fill = soft_impute(prov.block_obs(l), lam, 1e-4, 200).m_hat;
        auto [sigma, bw] = mus_block(a_fill, b_fill);
        res.rounded_perms.push_back(sigma);
        res.plans.push_back(perm_plan(sigma));
        res.m_hat.middleCols(off, w) = apply_rows(sigma.inverse(), b_fill);
    }

    res.objective_trace.push_back(assignment_objective(res.m_hat, obs, part, res.rounded_perms, lam));
    res.stepsize_trace.push_back(0.0);
    res.entropy_trace.push_back(0.0);
    res.lambda_trace.push_back(lam);
    return res;
}

}  // namespace unshuffle
