#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "unshuffle/lamat.hpp"
#include "unshuffle/perm.hpp"
#include "unshuffle/solvers.hpp"

namespace unshuffle {

// A recovery instance: the solver sees `observed` (shuffled alignment); the
// truth fields live in the unshuffled alignment and drive metrics only.
struct scenario {
    masked_matrix observed;
    block_partition partition;

    bool has_truth = false;
    dense_matrix m_true;
    std::vector<permutation> perms_true;
    dense_matrix train_mask_true;  // observed entries mapped back to the true row order
    dense_matrix test_mask_true;   // held-out entries for test RMSE
};

// M = RE + eta*W with i.i.d. standard normal factors; independent uniform
// dense permutations per block; exactly round(obs_frac*n*m) entries observed,
// chosen uniformly without replacement.
scenario gen_synthetic(int n, int m, int r, double eta, const block_partition& partition, double obs_frac,
                       std::uint64_t seed);

// Root-mean-square error between a and b over mask's support (0 if empty).
double rmse_masked(const dense_matrix& a, const dense_matrix& b, const dense_matrix& mask);

// MovieLens 100K ingestion: one ratings block per genre (block columns are
// disjoint; a multi-genre movie goes to the first genre listing it), the
// first genre serving as the unpermuted anchor; other blocks get independent
// uniform user permutations.  Ratings split into train/test uniformly.
scenario load_movielens(const std::string& dir, const std::vector<std::string>& genres, double train_frac,
                        std::uint64_t seed);

const std::vector<std::string>& movielens_default_genres();  // Comedy, Romance, Drama, Action, Thriller

// Square-block image shuffling: the first `region_blocks` tiles (row-major,
// `block_size` square) are shuffled by one uniform permutation; missing_frac
// of all pixels masked uniformly.  The solver pairs estimate tiles with
// observed tiles through the returned cost provider; pixels outside the
// region act as the anchor through the scenario's observed mask.
struct image_scenario {
    scenario scen;
    std::shared_ptr<const cost_provider> provider;
    int block_size = 0;
    int region_blocks = 0;
    dense_matrix corrupted;       // shuffled + masked image, for rendering
    dense_matrix corrupted_mask;  // full observation mask of the corrupted image
};

image_scenario shuffle_image_blocks(const dense_matrix& image, int block_size, int region_blocks,
                                    double missing_frac, std::uint64_t seed);

// Rebuild an image from an estimate by writing tile sigma(i)'s observed
// content back into region slot i (sigma in the provider's row->col sense).
dense_matrix unshuffle_image(const image_scenario& is, const dense_matrix& m_hat,
                             const std::vector<permutation>& sigma);

// 8-bit binary PGM (P5, maxval 255); values scaled to [0, 1].
dense_matrix read_pgm(const std::string& path);
void write_pgm(const std::string& path, const dense_matrix& image);

// Reproducibility dump: manifest.json plus CSV matrices under dir.
void save_scenario(const scenario& s, const std::string& dir);

}  // namespace unshuffle
