#pragma once

#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "unshuffle/lamat.hpp"

namespace unshuffle {

// Bijection on {0..n-1}; map[i] = pi(i).  Serialized 1-based.
struct permutation {
    std::vector<int> map;

    permutation() = default;
    explicit permutation(std::vector<int> m);
    static permutation identity(int n);

    int size() const { return static_cast<int>(map.size()); }
    int operator()(int i) const { return map[i]; }
    bool operator==(const permutation& o) const { return map == o.map; }

    permutation inverse() const;
    permutation compose(const permutation& inner) const;  // this ∘ inner

    std::vector<int> to_one_based() const;
    static permutation from_one_based(const std::vector<int>& v);
};

// Cycle decomposition; H counts moved points, C counts cycles of length > 1.
struct cycle_stats {
    std::vector<std::vector<int>> cycles;
    int h = 0;
    int c = 0;
};

cycle_stats decompose_stats(const permutation& p);

int d_hamming(const permutation& p1, const permutation& p2);

// Dense mode (k absent): uniform over S_n.  Sparse mode: H(pi) = k exactly,
// realized as a cyclic derangement of a uniformly chosen k-subset (k = 0 gives
// the identity; k = 1 is impossible).
permutation random_permutation(int n, std::optional<int> k, std::uint64_t seed);

// Row action PX: input row j lands at output row pi(j).
dense_matrix apply_rows(const permutation& p, const dense_matrix& x);

// min{n, m, r_A + sum r_Bl, r + sum(H_l - C_l)}; blocks carry (r_Bl, H_l, C_l).
int rank_upper_bound(int n, int m, int r, int r_a, const std::vector<std::tuple<int, int, int>>& blocks);

}  // namespace unshuffle
