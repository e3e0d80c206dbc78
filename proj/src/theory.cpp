#include "unshuffle/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "unshuffle/completion.hpp"
#include "unshuffle/rng.hpp"

namespace unshuffle {

namespace {

constexpr double kDegenerateGap = 1e-6;

double padded(const Eigen::VectorXd& s, int i) { return i < s.size() ? s(i) : 0.0; }

// Indices whose singular value sits within kDegenerateGap of a neighbor; the
// corresponding singular vectors are not well-defined.
std::vector<bool> degenerate_indices(const Eigen::VectorXd& s, int upto) {
    std::vector<bool> bad(static_cast<std::size_t>(upto), false);
    for (int i = 0; i < upto; ++i) {
        if (i > 0 && std::abs(s(i - 1) - s(i)) < kDegenerateGap) bad[static_cast<std::size_t>(i)] = true;
        if (i + 1 < s.size() && std::abs(s(i) - s(i + 1)) < kDegenerateGap) bad[static_cast<std::size_t>(i)] = true;
    }
    return bad;
}

double min_entry_gap(const Eigen::VectorXd& u) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < u.size(); ++i)
        for (Eigen::Index j = i + 1; j < u.size(); ++j) gap = std::min(gap, std::abs(u(i) - u(j)));
    return gap;
}

dense_matrix hcat(const dense_matrix& a, const dense_matrix& b) {
    dense_matrix m(a.rows(), a.cols() + b.cols());
    m << a, b;
    return m;
}

}  // namespace

theorem_inputs assumption_constants(const dense_matrix& a, const dense_matrix& b, double sigma_noise) {
    if (a.rows() != b.rows()) throw std::invalid_argument("A and B must share a row count");
    const svd_factors fa = svd(a);
    const svd_factors fb = svd(b);
    theorem_inputs inp;
    inp.sigma_noise = sigma_noise;
    inp.r_a = numeric_rank(a);
    inp.r_b = numeric_rank(b);
    inp.t = std::min(inp.r_a, inp.r_b);
    const dense_matrix m = hcat(a, b);
    inp.r = numeric_rank(m);
    const double na = nuclear_norm(a);
    const double nb = nuclear_norm(b);
    inp.d_sum = na + nb;
    inp.n_big = std::max(na, nb);
    inp.z_small = std::min(na, nb);
    inp.l_dim = static_cast<double>(std::max(m.rows(), m.cols()));

    for (int i = 0; i < inp.r; ++i) inp.eps1 = std::max(inp.eps1, std::abs(padded(fa.sigma, i) - padded(fb.sigma, i)));

    const std::vector<bool> bad_a = degenerate_indices(fa.sigma, inp.t);
    const std::vector<bool> bad_b = degenerate_indices(fb.sigma, inp.t);
    for (int i = 0; i < inp.t; ++i) {
        if (bad_a[static_cast<std::size_t>(i)] || bad_b[static_cast<std::size_t>(i)]) {
            inp.degenerate = true;
            continue;
        }
        Eigen::VectorXd ua = fa.u.col(i);
        Eigen::VectorXd ub = fb.u.col(i);
        if (ua.dot(ub) < 0.0) ub = -ub;  // singular vectors are sign-ambiguous
        inp.eps2 = std::max(inp.eps2, (ua - ub).norm());
    }

    inp.eps3 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < inp.t; ++i) {
        inp.eps3 = std::min(inp.eps3, min_entry_gap(fa.u.col(i)));
        inp.eps3 = std::min(inp.eps3, min_entry_gap(fb.u.col(i)));
    }
    if (!std::isfinite(inp.eps3)) inp.eps3 = 0.0;  // T = 0: no vectors to gap
    return inp;
}

theorem_bound theorem_error_bound(const theorem_inputs& inp) {
    theorem_bound out;
    const double d = inp.d_sum;
    const double n = inp.n_big;
    const double l = inp.l_dim;
    const double sig = inp.sigma_noise;
    const double r = static_cast<double>(inp.r);
    const double t = static_cast<double>(inp.t);
    const double sqrt2 = std::sqrt(2.0);

    out.assumptions_ok = inp.eps1 <= d / (4.0 * std::max(r, 1.0)) &&
                         inp.eps2 <= std::min(1.0 / (2.0 * std::sqrt(2.0 * std::max(t, 1.0))),
                                              sqrt2 * d / (2.0 * std::max(n, 1e-300))) &&
                         sig <= d / (16.0 * l * l);
    out.prob = sig == 0.0 ? 1.0 : 1.0 - 2.0 * std::exp(-d / (8.0 * l * sig));
    if (inp.eps3 <= 0.0) {
        out.eps3_zero = true;
        out.bound = std::numeric_limits<double>::infinity();
        return out;
    }
    const double denom = d + (sqrt2 + 2.0) * inp.eps1 * r + sqrt2 * inp.eps2 * n + 2.0 * std::sqrt(2.0 * d * l * sig);
    const double inner = sqrt2 * d / denom - std::sqrt(t) * inp.eps2;
    out.bound = (2.0 / (inp.eps3 * inp.eps3)) * (2.0 - inner * inner);
    return out;
}

sandwich_report nuclear_sandwich_check(const dense_matrix& a, const dense_matrix& b, const permutation& p) {
    if (a.rows() != b.rows()) throw std::invalid_argument("A and B must share a row count");
    if (p.size() != static_cast<int>(b.rows())) throw std::invalid_argument("permutation size must match row count");
    sandwich_report rep;
    const double na = nuclear_norm(a);
    const double nb = nuclear_norm(b);
    rep.value = nuclear_norm(hcat(a, apply_rows(p, b)));
    rep.lower = (na + nb) / std::sqrt(2.0);
    rep.upper = na + nb;
    rep.slack_lower = rep.value - rep.lower;
    rep.slack_upper = rep.upper - rep.value;
    const double nm = nuclear_norm(hcat(a, b));
    rep.ratio = (rep.value - nm) / nm;
    rep.ratio_bound = std::min(na, nb) / std::max(na, nb);
    const double tol = 1e-9 * (1.0 + rep.upper);
    rep.sandwich_holds = rep.slack_lower >= -tol && rep.slack_upper >= -tol;
    rep.ratio_holds = std::abs(rep.ratio) <= rep.ratio_bound + 1e-9;
    return rep;
}

rank_check_report generic_rank_check(int n, int m_a, int m_b, int r, int trials, std::uint64_t seed) {
    if (r > static_cast<int>(std::floor(std::sqrt(n / 2.0))))
        throw std::invalid_argument("generic rank check requires r <= floor(sqrt(n/2))");
    if (r > m_a || r > m_b) throw std::invalid_argument("generic rank check requires r <= min(m_A, m_B)");
    rank_check_report rep;
    rep.trials = trials;
    rng g(seed);
    for (int t = 0; t < trials; ++t) {
        dense_matrix rf(n, r), ef(r, m_a + m_b);
        for (Eigen::Index i = 0; i < rf.rows(); ++i)
            for (Eigen::Index j = 0; j < rf.cols(); ++j) rf(i, j) = g.gaussian();
        for (Eigen::Index i = 0; i < ef.rows(); ++i)
            for (Eigen::Index j = 0; j < ef.cols(); ++j) ef(i, j) = g.gaussian();
        const dense_matrix m = rf * ef;
        const permutation p = random_permutation(n, std::nullopt, g.next_u64());
        const cycle_stats cs = decompose_stats(p);
        const int predicted = std::min(2 * r, r + cs.h - cs.c);
        const dense_matrix cat = hcat(m.leftCols(m_a), apply_rows(p, m.rightCols(m_b)));
        if (numeric_rank(cat) == predicted)
            ++rep.matches;
        else
            rep.failed_trials.push_back(t);
    }
    rep.fraction = trials > 0 ? static_cast<double>(rep.matches) / trials : 0.0;
    return rep;
}

std::vector<ratio_curve_row> nuclear_ratio_curve(const dense_matrix& m, const block_partition& split,
                                                 const std::vector<double>& obs_fracs,
                                                 const std::vector<int>& h_targets, double lam, std::uint64_t seed) {
    split.validate(m.cols());
    if (split.d() != 1) throw std::invalid_argument("ratio curve is defined for a single permutable block");
    const int n = static_cast<int>(m.rows());
    const double nm = nuclear_norm(m);
    std::vector<ratio_curve_row> rows;
    std::uint64_t stream = seed;
    for (double f : obs_fracs) {
        for (int h : h_targets) {
            const permutation p = random_permutation(n, h == 0 ? std::optional<int>(0) : std::optional<int>(h),
                                                     stream++);
            dense_matrix shuffled = m;
            shuffled.middleCols(split.m_a, split.widths[0]) =
                apply_rows(p, m.middleCols(split.m_a, split.widths[0]));

            dense_matrix filled = shuffled;
            if (f < 1.0) {
                const Eigen::Index total = shuffled.size();
                const auto keep = static_cast<Eigen::Index>(std::llround(f * static_cast<double>(total)));
                std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
                std::iota(idx.begin(), idx.end(), 0);
                rng g(stream++);
                for (Eigen::Index i = total - 1; i > 0; --i)
                    std::swap(idx[static_cast<std::size_t>(i)], idx[g.bounded(static_cast<std::uint64_t>(i + 1))]);
                dense_matrix mask = dense_matrix::Zero(shuffled.rows(), shuffled.cols());
                for (Eigen::Index k = 0; k < keep; ++k) {
                    const Eigen::Index e = idx[static_cast<std::size_t>(k)];
                    mask(e % shuffled.rows(), e / shuffled.rows()) = 1.0;
                }
                const masked_matrix obs(shuffled.cwiseProduct(mask), mask);
                const dense_matrix imputed = soft_impute(obs, lam, 1e-4, 300).m_hat;
                // keep observed entries exact; soft-impute fills only the holes
                filled = mask.cwiseProduct(shuffled) + (1.0 - mask.array()).matrix().cwiseProduct(imputed);
            }
            rows.push_back({f, h, nuclear_norm(filled) / nm});
        }
    }
    return rows;
}

std::pair<permutation, double> brute_force_min_nuclear(const dense_matrix& a_obs, const dense_matrix& b_obs) {
    if (a_obs.rows() != b_obs.rows()) throw std::invalid_argument("A and B must share a row count");
    const int n = static_cast<int>(a_obs.rows());
    if (n > 9) throw std::invalid_argument("exhaustive search refused for n > 9");
    std::vector<int> map(static_cast<std::size_t>(n));
    std::iota(map.begin(), map.end(), 0);
    permutation best;
    double best_val = std::numeric_limits<double>::infinity();
    do {
        const permutation p{std::vector<int>(map)};
        const double val = nuclear_norm(hcat(a_obs, apply_rows(p, b_obs)));
        if (val < best_val) {  // strict: first (lexicographically smallest) keeps ties
            best_val = val;
            best = p;
        }
    } while (std::next_permutation(map.begin(), map.end()));
    return {best, best_val};
}

}  // namespace unshuffle
