// Final verification gate.  Each numbered check prints exactly one PASS/FAIL
// line with its measured quantities and tolerance; the process exits non-zero
// if any executed check fails.  The ratings check (11) runs only when invoked
// with --movielens <dir> and exits 77 when the dataset is not present.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "unshuffle/cli.hpp"
#include "unshuffle/completion.hpp"
#include "unshuffle/data.hpp"
#include "unshuffle/eot.hpp"
#include "unshuffle/lamat.hpp"
#include "unshuffle/perm.hpp"
#include "unshuffle/rng.hpp"
#include "unshuffle/solvers.hpp"
#include "unshuffle/theory.hpp"

using namespace unshuffle;

namespace {

int failures = 0;

class stopwatch {
  public:
    stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0_)
                   .count() /
               1000.0;
    }

  private:
    std::chrono::steady_clock::time_point t0_;
};

void report(int idx, bool pass, const std::string& detail) {
    std::printf("[%2d] %s  %s\n", idx, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

dense_matrix randn(rng& g, Eigen::Index r, Eigen::Index c) {
    dense_matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g.gaussian();
    return m;
}

// Thin orthonormal factor of a Gaussian matrix.
dense_matrix orthonormal(rng& g, Eigen::Index rows, Eigen::Index cols) {
    const dense_matrix x = randn(g, rows, cols);
    Eigen::HouseholderQR<dense_matrix> qr(x);
    dense_matrix q = qr.householderQ() * dense_matrix::Identity(rows, cols);
    return q;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, ap);
    va_end(ap);
    return buf;
}

// ------------------------------------------------------------------ checks

// 1. On random low-rank instances the achievable rank of the misassembled
//    matrix equals its combinatorial prediction in every trial.
void check_1() {
    stopwatch sw;
    const rank_check_report rep = generic_rank_check(32, 8, 8, 3, 200, 101);
    const double secs = sw.seconds();
    report(1, rep.fraction == 1.0 && secs < 10.0,
           fmt("rank prediction equality %.3f (%d/%d trials, threshold 1e-8 rel) in %.1fs (limit 10s)",
               rep.fraction, rep.matches, rep.trials, secs));
}

// 2. The misassembled nuclear norm always lies in its two-sided envelope.
void check_2() {
    rng g(202);
    int ok = 0;
    double worst_slack = 1e300;
    for (int t = 0; t < 500; ++t) {
        const dense_matrix a = randn(g, 20, 6);
        const dense_matrix b = randn(g, 20, 5);
        const permutation p = random_permutation(20, std::nullopt, g.next_u64());
        const sandwich_report rep = nuclear_sandwich_check(a, b, p);
        if (rep.sandwich_holds && rep.slack_lower >= 0.0 && rep.slack_upper >= 0.0) ++ok;
        worst_slack = std::min({worst_slack, rep.slack_lower, rep.slack_upper});
    }
    report(2, ok == 500, fmt("nuclear envelope held on %d/500 instances (worst slack %.3g >= 0)", ok, worst_slack));
}

// 3. The max-oracle's dual objective ascends sweep by sweep, meets its marginal
//    tolerance, and the log-domain evaluation matches direct scaling.
void check_3() {
    rng g(303);
    bool monotone = true, residual_ok = true;
    double worst_drop = 0.0, worst_res = 0.0;
    for (int t = 0; t < 100; ++t) {
        cost_matrix c(20, 20);
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) c(i, j) = g.uniform();
        for (const double eps : {1.0, 0.1}) {
            double prev = -1e300;
            for (int sweeps = 1; sweeps <= 40; ++sweeps) {
                const sinkhorn_result sr = sinkhorn_log(c, eps, 0.0, sweeps);
                const double val = dual_objective(c, sr.duals, eps);
                worst_drop = std::max(worst_drop, prev - val);
                if (val < prev - 1e-9) monotone = false;
                prev = val;
                if (sr.converged) break;
            }
            const sinkhorn_result fin = sinkhorn_log(c, eps, 0.01, 10000);
            const int n = 20;
            const double row_res =
                (fin.plan.rowwise().sum() - Eigen::VectorXd::Ones(n)).norm() / std::sqrt(static_cast<double>(n));
            const double col_res =
                (fin.plan.colwise().sum().transpose() - Eigen::VectorXd::Ones(n)).norm() /
                std::sqrt(static_cast<double>(n));
            const double res = std::max(row_res, col_res);
            worst_res = std::max(worst_res, res);
            if (res > 0.01) residual_ok = false;
        }
    }

    // Direct scaling reference at a moderate temperature.
    double worst_gap = 0.0;
    for (int t = 0; t < 10; ++t) {
        const int n = 20;
        cost_matrix c(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) c(i, j) = g.uniform();
        const double eps = 0.5;
        const dense_matrix k = (-c / eps).array().exp();
        Eigen::VectorXd u = Eigen::VectorXd::Ones(n), v = Eigen::VectorXd::Ones(n);
        for (int it = 0; it < 5000; ++it) {
            u = (k * v).cwiseInverse();
            v = (k.transpose() * u).cwiseInverse();
        }
        const transport_plan direct = u.asDiagonal() * k * v.asDiagonal();
        const sinkhorn_result sr = sinkhorn_log(c, eps, 1e-13, 100000);
        worst_gap = std::max(worst_gap, (direct - sr.plan).cwiseAbs().maxCoeff());
    }
    report(3, monotone && residual_ok && worst_gap <= 1e-8,
           fmt("dual ascent monotone (worst drop %.2g, tol 1e-9), marginal residual %.4g <= 0.01, "
               "log vs direct gap %.2g <= 1e-8",
               worst_drop, worst_res, worst_gap));
}

// 4. The analytic estimate-gradient of the fixed-dual objective matches
//    central finite differences.
void check_4() {
    rng g(404);
    double worst_rel = 0.0;
    for (int t = 0; t < 50; ++t) {
        const int n = 10, w = 6;
        dense_matrix bdata = randn(g, n, w), bmask(n, w);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j) bmask(i, j) = g.uniform() < 0.4 ? 1.0 : 0.0;
        const masked_matrix b_obs(bdata, bmask);
        dense_matrix mb = randn(g, n, w);
        const double eps = 1.0;
        const sinkhorn_result sr = sinkhorn_log(masked_pair_cost(mb, b_obs), eps, 1e-10, 100000);
        const transport_plan plan = plan_from_duals(masked_pair_cost(mb, b_obs), sr.duals, eps);
        const dense_matrix analytic = grad_entropic(mb, b_obs, plan);

        dense_matrix fd(n, w);
        const double h = 1e-5;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j) {
                dense_matrix mp = mb, mm = mb;
                mp(i, j) += h;
                mm(i, j) -= h;
                const double fp = dual_objective(masked_pair_cost(mp, b_obs), sr.duals, eps);
                const double fm = dual_objective(masked_pair_cost(mm, b_obs), sr.duals, eps);
                fd(i, j) = (fp - fm) / (2.0 * h);
            }
        const double rel = (analytic - fd).norm() / std::max(1.0, fd.norm());
        worst_rel = std::max(worst_rel, rel);
    }
    report(4, worst_rel <= 1e-4,
           fmt("estimate-gradient vs central differences: worst relative error %.3g <= 1e-4 (50 instances)",
               worst_rel));
}

// 5. The assignment solver returns the exhaustive optimum on every 7x7 case.
void check_5() {
    rng g(505);
    int exact = 0;
    double worst_gap = 0.0;
    for (int t = 0; t < 100; ++t) {
        const cost_matrix c = randn(g, 7, 7);
        const auto [sigma, value] = lap_solve(c);
        std::vector<int> idx{0, 1, 2, 3, 4, 5, 6};
        double best = 1e300;
        do {
            double v = 0.0;
            for (int i = 0; i < 7; ++i) v += c(i, idx[static_cast<std::size_t>(i)]);
            best = std::min(best, v);
        } while (std::next_permutation(idx.begin(), idx.end()));
        const double gap = std::abs(value - best);
        worst_gap = std::max(worst_gap, gap);
        if (gap <= 1e-9) ++exact;
    }
    report(5, exact == 100,
           fmt("assignment equals 5040-permutation scan on %d/100 costs (worst gap %.2g)", exact, worst_gap));
}

// 6. With the plan frozen to an exact permutation, rho = 0.5, and a fully
//    observed anchor, one outer min-max step reproduces one impute-and-shrink
//    step on the realigned data.
void check_6() {
    rng g(606);
    const int n = 10, ma = 6, w = 6;
    const dense_matrix base = randn(g, n, 2) * randn(g, 2, ma + w);
    dense_matrix mask(n, ma + w);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < ma + w; ++j) mask(i, j) = j < ma ? 1.0 : (g.uniform() < 0.6 ? 1.0 : 0.0);
    const permutation p = random_permutation(n, std::nullopt, g.next_u64());
    dense_matrix shuffled = base;
    shuffled.rightCols(w) = apply_rows(p, base.rightCols(w));
    dense_matrix smask = mask;
    smask.rightCols(w) = apply_rows(p, mask.rightCols(w));
    const masked_matrix observed(shuffled.cwiseProduct(smask), smask);
    const block_partition part{ma, {w}};

    const dense_matrix m0 = randn(g, n, ma + w);
    const double lam = 0.7;

    solver_config cfg;
    cfg.outer_iters = 1;
    cfg.lambda_sched = lambda_schedule::fixed(lam);
    cfg.rho_fixed = 0.5;
    cfg.forced_plans = {p};
    cfg.init = init_strategy::provided;
    cfg.init_matrix = m0;
    const recovery_result one = solve_m3o(observed, part, cfg);

    dense_matrix x = observed.data, xm = observed.mask;
    const permutation inv = p.inverse();
    x.rightCols(w) = apply_rows(inv, observed.data.rightCols(w));
    xm.rightCols(w) = apply_rows(inv, observed.mask.rightCols(w));
    const soft_impute_result si = soft_impute(masked_matrix(x, xm), lam, 1e-300, 1, m0);

    const double gap = (one.m_hat - si.m_hat).cwiseAbs().maxCoeff();
    report(6, gap <= 1e-9, fmt("one min-max step vs one impute-and-shrink step: max entry gap %.2g <= 1e-9", gap));
}

// Shared solver recipe for the permutation-recovery benchmarks: equilibrate
// the plans at high entropy with omega = 1, then anneal with omega = 3 so the
// sharpening plans commit before the estimate moves.
solver_config recovery_recipe(int outer, int burn_in, double eps_rel, double lam) {
    solver_config cfg;
    cfg.omega = 1.0;
    cfg.anneal_omega = 3.0;
    cfg.anneal_burn_in = burn_in;
    cfg.outer_iters = outer;
    cfg.patience = 100;
    cfg.eps_ent_init = eps_rel;
    cfg.eps_scale_from_cost = true;
    cfg.step_cap = 1.0;
    cfg.lambda_sched = lambda_schedule::fixed(lam);
    return cfg;
}

// 7. Single permuted block at full benchmark size: at least one of ten
//    Gaussian starts recovers the exact correspondence, and the min-max
//    solver's median objective beats both alternating baselines.
void check_7() {
    stopwatch sw;
    const block_partition part{60, {40}};
    const scenario sc = gen_synthetic(100, 100, 5, 0.1, part, 0.8, 1);

    std::vector<double> m3o_obj, base_obj, mus_obj;
    int best_dh = 1 << 30;
    for (int i = 0; i < 10; ++i) {
        solver_config cfg = recovery_recipe(2600, 1500, 0.3, 0.5);
        cfg.seed = 1000 + static_cast<std::uint64_t>(i);
        const recovery_result res = solve_m3o(sc.observed, sc.partition, cfg);
        m3o_obj.push_back(res.objective_trace.back());
        best_dh = std::min(best_dh, d_hamming(res.rounded_perms[0], sc.perms_true[0]));
    }
    for (int i = 0; i < 10; ++i) {
        solver_config cfg;
        cfg.lambda_sched = lambda_schedule::fixed(0.5);
        cfg.seed = 1000 + static_cast<std::uint64_t>(i);
        base_obj.push_back(solve_baseline(sc.observed, sc.partition, cfg).objective_trace.back());
        mus_obj.push_back(solve_mus(sc.observed, sc.partition, cfg).objective_trace.back());
    }
    const double m3o_med = median(m3o_obj), base_med = median(base_obj), mus_med = median(mus_obj);
    const double secs = sw.seconds();
    report(7, best_dh == 0 && m3o_med < base_med && m3o_med < mus_med && secs <= 300.0,
           fmt("best d_H %d (need 0); median objective %.1f vs baseline %.1f / alternating-regression %.1f "
               "(must be lowest); %.0fs (limit 300s)",
               best_dh, m3o_med, base_med, mus_med, secs));
}

// 8. Two permuted blocks at 40%% observation: the best of ten starts reaches a
//    near-exact correspondence and the average stays within the published
//    spread.
void check_8() {
    stopwatch sw;
    const block_partition part{40, {30, 30}};
    const scenario sc = gen_synthetic(100, 100, 5, 0.1, part, 0.4, 8);

    std::vector<double> errs;
    for (int i = 0; i < 10; ++i) {
        solver_config cfg = recovery_recipe(2600, 1500, 0.3, 0.5);
        cfg.seed = 2000 + static_cast<std::uint64_t>(i);
        const recovery_result res = solve_m3o(sc.observed, sc.partition, cfg);
        double total = 0.0;
        for (std::size_t l = 0; l < sc.perms_true.size(); ++l)
            total += d_hamming(res.rounded_perms[l], sc.perms_true[l]);
        errs.push_back(total / static_cast<double>(sc.perms_true.size()));
    }
    const double mn = *std::min_element(errs.begin(), errs.end());
    const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
    const double secs = sw.seconds();
    report(8, mn <= 5.0 && mean >= 0.0 && mean <= 75.0 && secs <= 600.0,
           fmt("normalized permutation error: min %.2f (need <= 5), mean %.2f (need within [0, 75]); "
               "%.0fs (limit 600s)",
               mn, mean, secs));
}

// 9. On planted instances satisfying the recovery assumptions the exhaustive
//    minimizer matches the truth and never exceeds the error bound.
void check_9() {
    rng g(909);
    const int n = 7, ma = 3, r = 2;
    int exact = 0, within = 0, attempts = 0;
    double worst_bound0 = 0.0;
    for (int t = 0; t < 50; ++t) {
        // Rejection-sample a shared column space with well-separated leading
        // directions so the identifiability constant stays away from zero.
        dense_matrix u, va, vb;
        theorem_inputs inp{};
        dense_matrix a, b;
        for (;;) {
            ++attempts;
            u = orthonormal(g, n, r);
            va = orthonormal(g, ma, r);
            const dense_matrix sigma = Eigen::Vector2d(3.0, 1.5).asDiagonal();
            a = u * sigma * va.transpose();
            b = a;
            inp = assumption_constants(a, b, 0.0);
            const theorem_bound tb = theorem_error_bound(inp);
            if (tb.assumptions_ok && !tb.eps3_zero) break;
        }
        const theorem_bound tb = theorem_error_bound(inp);
        worst_bound0 = std::max(worst_bound0, std::abs(tb.bound));

        const permutation p_tilde = random_permutation(n, std::nullopt, g.next_u64());
        const auto [q_star, value] = brute_force_min_nuclear(a, apply_rows(p_tilde, b));
        if (d_hamming(q_star.inverse(), p_tilde) == 0 && std::abs(tb.bound) <= 1e-9) ++exact;

        // Slightly separated spectra: the bound becomes positive and must
        // still dominate the observed error.
        const dense_matrix sigma_b = Eigen::Vector2d(3.001, 1.5005).asDiagonal();
        vb = orthonormal(g, ma, r);
        const dense_matrix b2 = u * sigma_b * vb.transpose();
        const theorem_inputs inp2 = assumption_constants(a, b2, 0.0);
        const theorem_bound tb2 = theorem_error_bound(inp2);
        const auto [q2, v2] = brute_force_min_nuclear(a, apply_rows(p_tilde, b2));
        const double dh2 = d_hamming(q2.inverse(), p_tilde);
        if (std::isinf(tb2.bound) || dh2 <= tb2.bound + 1e-12) ++within;
    }
    report(9, exact == 50 && within == 50,
           fmt("noiseless planted recovery exact with zero bound on %d/50 (|bound| <= 1e-9, worst %.2g); "
               "perturbed error within bound on %d/50",
               exact, worst_bound0, within));
}

// 10. The misassembly penalty of the nuclear norm tracks its predicted
//     (1 - H/2n)^(-1/2) growth across displacement levels.
void check_10() {
    rng g(1010);
    const int n = 100, half = 50;
    dense_matrix sig = dense_matrix::Zero(5, 5);
    sig.diagonal() << 10.0, 8.0, 6.0, 4.0, 2.0;
    const dense_matrix m = orthonormal(g, n, 5) * sig * orthonormal(g, 2 * half, 5).transpose();
    const block_partition split{half, {half}};
    std::vector<int> hs{0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
    const std::vector<ratio_curve_row> curve = nuclear_ratio_curve(m, split, {1.0, 0.4}, hs, 0.1, 42);

    std::vector<double> predicted;
    predicted.reserve(hs.size());
    for (int h : hs) predicted.push_back(1.0 / std::sqrt(1.0 - static_cast<double>(h) / (2.0 * n)));

    std::vector<double> full, partial;
    for (const ratio_curve_row& row : curve) (row.obs_frac == 1.0 ? full : partial).push_back(row.ratio);
    const double rho_full = spearman(full, predicted);
    const double rho_partial = spearman(partial, predicted);
    report(10, rho_full >= 0.95 && rho_partial >= 0.8,
           fmt("misassembly ratio rank-correlation: %.3f at full observation (need >= 0.95), "
               "%.3f at 40%% (need >= 0.8)",
               rho_full, rho_partial));
}

// 11. Ratings benchmark (optional): held-out RMSE ordering across methods and
//     the min-max solver's absolute accuracy window.
int check_11(const std::string& dir) {
    if (!std::filesystem::exists(dir + "/u.data")) {
        std::printf("[11] SKIP  ratings dataset not found under %s\n", dir.c_str());
        return 77;
    }
    stopwatch sw;
    experiment_spec spec;
    spec.command = "movielens";
    spec.data_dir = dir;
    spec.train_frac = 0.8;
    spec.algorithms = {"m3o", "baseline", "mus", "oracle", "sic", "sir"};
    for (int s = 0; s < 10; ++s) spec.seeds.push_back(4000 + static_cast<std::uint64_t>(s));
    spec.solver.omega = 0.5;
    spec.solver.outer_iters = 400;
    spec.solver.patience = 100;
    spec.solver.eps_ent_init = 0.3;
    spec.solver.anneal_burn_in = 150;
    spec.solver.anneal_omega = 3.0;
    spec.solver.step_cap = 1.0;
    spec.solver.lambda_sched = lambda_schedule::stepped(300.0, 10.0, 10.0, 10);
    spec.out_dir = (std::filesystem::temp_directory_path() / "unshuffle_acceptance_ml").string();
    std::filesystem::remove_all(spec.out_dir);
    if (run_experiment(spec) != 0) {
        report(11, false, "ratings pipeline returned a failure status");
        return 1;
    }

    std::ifstream sf(spec.out_dir + "/summary.json");
    std::stringstream ss;
    ss << sf.rdbuf();
    const auto rmse_of = [&](const std::string& name) {
        // summary.json is written by this build; a tiny targeted scan keeps the
        // gate free of a JSON dependency.
        const std::string text = ss.str();
        const std::string key = "\"" + name + "\"";
        std::size_t pos = text.find(key);
        pos = text.find("\"rmse_test\"", pos);
        pos = text.find("\"mean\"", pos);
        pos = text.find(':', pos);
        return std::strtod(text.c_str() + pos + 1, nullptr);
    };
    const double m3o = rmse_of("m3o"), base = rmse_of("baseline"), mus = rmse_of("mus");
    const double oracle = rmse_of("oracle"), sic = rmse_of("sic"), sir = rmse_of("sir");
    const double secs = sw.seconds();
    const bool ordering = sir > sic && sic >= std::max(base, mus) && std::min(base, mus) > m3o &&
                          m3o >= oracle - 0.03;
    const bool window = m3o >= 0.87 && m3o <= 0.95;
    report(11, ordering && window && secs <= 1800.0,
           fmt("held-out RMSE: sir %.4f > sic %.4f >= {baseline %.4f, regression %.4f} > m3o %.4f >= "
               "oracle %.4f - 0.03; m3o within [0.87, 0.95]; %.0fs (limit 1800s)",
               sir, sic, base, mus, m3o, oracle, secs));
    return (ordering && window && secs <= 1800.0) ? 0 : 1;
}

// 12. Identical specs reproduce identical result tables (wall time aside).
void check_12() {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "unshuffle_acceptance_repro").string();
    std::filesystem::remove_all(dir);

    experiment_spec spec;
    spec.command = "synth";
    spec.n = 24;
    spec.m = 20;
    spec.r = 2;
    spec.eta = 0.05;
    spec.obs_frac = 0.8;
    spec.m_a = 10;
    spec.widths = {10};
    spec.scenario_seed = 12;
    spec.algorithms = {"m3o", "baseline", "mus", "oracle", "sic", "sir"};
    spec.seeds = {3, 4};
    spec.solver.outer_iters = 120;
    spec.solver.lambda_sched = lambda_schedule::fixed(0.4);

    const auto run_once = [&](const std::string& out) {
        spec.out_dir = out;
        if (run_experiment(spec) != 0) return std::string();
        std::ifstream in(out + "/results.csv");
        std::stringstream ss;
        std::string line;
        while (std::getline(in, line)) ss << line.substr(0, line.rfind(',')) << '\n';
        return ss.str();
    };
    const std::string first = run_once(dir + "/a");
    const std::string second = run_once(dir + "/b");
    report(12, !first.empty() && first == second,
           fmt("re-run result tables byte-identical excluding wall time (%zu bytes compared)", first.size()));
}

}  // namespace

int main(int argc, char** argv) {
    std::string movielens_dir;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--movielens") == 0 && i + 1 < argc) movielens_dir = argv[i + 1];

    if (!movielens_dir.empty()) return check_11(movielens_dir);

    check_1();
    check_2();
    check_3();
    check_4();
    check_5();
    check_6();
    check_7();
    check_8();
    check_9();
    check_10();
    check_12();

    if (failures > 0) {
        std::printf("%d criterion check(s) failed\n", failures);
        return 1;
    }
    std::printf("all executed criterion checks passed\n");
    return 0;
}
