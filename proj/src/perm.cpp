#include "unshuffle/perm.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "unshuffle/rng.hpp"

namespace unshuffle {

permutation::permutation(std::vector<int> m) : map(std::move(m)) {
    const int n = static_cast<int>(map.size());
    std::vector<char> seen(n, 0);
    for (int v : map) {
        if (v < 0 || v >= n || seen[v]) throw std::invalid_argument("permutation: not a bijection");
        seen[v] = 1;
    }
}

permutation permutation::identity(int n) {
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    permutation p;
    p.map = std::move(m);
    return p;
}

permutation permutation::inverse() const {
    permutation out;
    out.map.resize(map.size());
    for (int i = 0; i < size(); ++i) out.map[map[i]] = i;
    return out;
}

permutation permutation::compose(const permutation& inner) const {
    if (size() != inner.size()) throw std::invalid_argument("compose: size mismatch");
    permutation out;
    out.map.resize(map.size());
    for (int i = 0; i < size(); ++i) out.map[i] = map[inner.map[i]];
    return out;
}

std::vector<int> permutation::to_one_based() const {
    std::vector<int> v(map.size());
    for (size_t i = 0; i < map.size(); ++i) v[i] = map[i] + 1;
    return v;
}

permutation permutation::from_one_based(const std::vector<int>& v) {
    std::vector<int> m(v.size());
    for (size_t i = 0; i < v.size(); ++i) m[i] = v[i] - 1;
    return permutation(std::move(m));
}

cycle_stats decompose_stats(const permutation& p) {
    cycle_stats st;
    const int n = p.size();
    std::vector<char> visited(n, 0);
    for (int i = 0; i < n; ++i) {
        if (visited[i]) continue;
        std::vector<int> cyc;
        int j = i;
        while (!visited[j]) {
            visited[j] = 1;
            cyc.push_back(j);
            j = p(j);
        }
        if (cyc.size() > 1) {
            st.h += static_cast<int>(cyc.size());
            ++st.c;
        }
        st.cycles.push_back(std::move(cyc));
    }
    return st;
}

int d_hamming(const permutation& p1, const permutation& p2) {
    if (p1.size() != p2.size()) throw std::invalid_argument("d_hamming: size mismatch");
    int d = 0;
    for (int i = 0; i < p1.size(); ++i)
        if (p1(i) != p2(i)) ++d;
    return d;
}

permutation random_permutation(int n, std::optional<int> k, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("random_permutation: n must be positive");
    rng gen(seed);
    if (!k.has_value()) {
        // Fisher-Yates: uniform over S_n.
        std::vector<int> m(n);
        std::iota(m.begin(), m.end(), 0);
        for (int i = n - 1; i > 0; --i)
            std::swap(m[i], m[gen.bounded(static_cast<std::uint64_t>(i) + 1)]);
        return permutation(std::move(m));
    }
    const int budget = *k;
    if (budget == 0) return permutation::identity(n);
    if (budget == 1 || budget < 0 || budget > n)
        throw std::invalid_argument("random_permutation: moved-point budget must be 0 or in [2, n]");
    // Uniform k-subset via partial Fisher-Yates; a uniformly ordered traversal
    // of the subset closed into a single k-cycle is a derangement of the
    // subset with H = k exactly, no rejection needed.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < budget; ++i) {
        const int j = i + static_cast<int>(gen.bounded(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    std::vector<int> cyc(idx.begin(), idx.begin() + budget);
    for (int i = budget - 1; i > 0; --i)
        std::swap(cyc[i], cyc[gen.bounded(static_cast<std::uint64_t>(i) + 1)]);
    permutation p = permutation::identity(n);
    for (int i = 0; i < budget; ++i) p.map[cyc[i]] = cyc[(i + 1) % budget];
    return p;
}

dense_matrix apply_rows(const permutation& p, const dense_matrix& x) {
    if (p.size() != x.rows()) throw std::invalid_argument("apply_rows: row-count mismatch");
    dense_matrix out(x.rows(), x.cols());
    for (int j = 0; j < p.size(); ++j) out.row(p(j)) = x.row(j);
    return out;
}

int rank_upper_bound(int n, int m, int r, int r_a, const std::vector<std::tuple<int, int, int>>& blocks) {
    if (n < 0 || m < 0 || r < 0 || r_a < 0) throw std::invalid_argument("rank_upper_bound: negative argument");
    int sum_rb = 0, sum_hc = 0;
    for (const auto& [r_bl, h_l, c_l] : blocks) {
        if (r_bl < 0 || h_l < 0 || c_l < 0) throw std::invalid_argument("rank_upper_bound: negative block entry");
        sum_rb += r_bl;
        sum_hc += h_l - c_l;
    }
    return std::min(std::min(n, m), std::min(r_a + sum_rb, r + sum_hc));
}

}  // namespace unshuffle
