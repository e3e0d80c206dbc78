#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "unshuffle/lamat.hpp"
#include "unshuffle/perm.hpp"
#include "unshuffle/solvers.hpp"

namespace unshuffle {

// Constants entering the recovery error bound for the nuclear-norm
// minimization problem min_P ||[A, PB]||_*.
struct theorem_inputs {
    double eps1 = 0.0;  // max_i |sigma_A^i - sigma_B^i|, spectra zero-padded to length r
    double eps2 = 0.0;  // max_{i<=T} ||u_A^i - u_B^i|| after sign alignment
    double eps3 = 0.0;  // min over u in {u_A^1..T, u_B^1..T} of the min pairwise entry gap
    int t = 0;          // min(r_A, r_B)
    int r = 0;          // numeric rank of [A, B]
    int r_a = 0;
    int r_b = 0;
    double d_sum = 0.0;   // ||A||_* + ||B||_*
    double n_big = 0.0;   // max(||A||_*, ||B||_*)
    double z_small = 0.0; // min(||A||_*, ||B||_*)
    double l_dim = 0.0;   // max(n, m)
    double sigma_noise = 0.0;
    bool degenerate = false;  // some singular-value gap < 1e-6: eps2 skips those indices
};

theorem_inputs assumption_constants(const dense_matrix& a, const dense_matrix& b, double sigma_noise = 0.0);

struct theorem_bound {
    double bound = 0.0;  // +inf sentinel when eps3 = 0
    double prob = 1.0;   // 1 - 2exp(-D/(8 L sigma)); 1 at sigma = 0
    bool assumptions_ok = false;
    bool eps3_zero = false;
};

// bound = (2/eps3^2) * (2 - (sqrt(2) D / (D + (sqrt(2)+2) eps1 r + sqrt(2) eps2 N
//          + 2 sqrt(2 D L sigma)) - sqrt(T) eps2)^2).
// assumptions_ok: eps1 <= D/(4r), eps2 <= min(1/(2 sqrt(2T)), sqrt(2) D/(2N)),
// sigma <= D/(16 L^2).
theorem_bound theorem_error_bound(const theorem_inputs& inp);

struct sandwich_report {
    double value = 0.0;        // ||[A, PB]||_*
    double lower = 0.0;        // (||A||_* + ||B||_*) / sqrt(2)
    double upper = 0.0;        // ||A||_* + ||B||_*
    double slack_lower = 0.0;  // value - lower
    double slack_upper = 0.0;  // upper - value
    double ratio = 0.0;        // (||[A,PB]||_* - ||M||_*) / ||M||_*, M = [A, B]
    double ratio_bound = 0.0;  // Z/N with N = max, Z = min of the two nuclear norms
    bool sandwich_holds = false;
    bool ratio_holds = false;
};

sandwich_report nuclear_sandwich_check(const dense_matrix& a, const dense_matrix& b, const permutation& p);

struct rank_check_report {
    int trials = 0;
    int matches = 0;
    double fraction = 0.0;
    std::vector<int> failed_trials;
};

// For `trials` random (R, E, P) with standard normal factors, compares the
// numeric rank of [A, PB] against the predicted min{2r, r + H(pi) - C(pi)}.
// Requires r <= min(floor(sqrt(n/2)), m_A, m_B).
rank_check_report generic_rank_check(int n, int m_a, int m_b, int r, int trials, std::uint64_t seed);

struct ratio_curve_row {
    double obs_frac = 0.0;
    int h = 0;
    double ratio = 0.0;
};

// Permutation-sensitivity curve of the nuclear norm: for each observation
// fraction and each target H, permutes the single permutable block with
// H(pi) = H, masks, fills missing entries by soft-impute (observed entries
// kept exact), and records ||[A, PB]||_* / ||M||_*.
std::vector<ratio_curve_row> nuclear_ratio_curve(const dense_matrix& m, const block_partition& split,
                                                 const std::vector<double>& obs_fracs,
                                                 const std::vector<int>& h_targets, double lam, std::uint64_t seed);

// Exhaustive minimizer of ||[A, PB]||_* over all n! row permutations of B;
// lexicographically smallest permutation wins ties.  n <= 9.
std::pair<permutation, double> brute_force_min_nuclear(const dense_matrix& a_obs, const dense_matrix& b_obs);

}  // namespace unshuffle
