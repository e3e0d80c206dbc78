#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unshuffle/data.hpp"
#include "unshuffle/solvers.hpp"

namespace unshuffle {

// One batch experiment: a scenario recipe, a solver configuration, and the
// algorithm set to run on it.  Parsed from a single JSON document.
struct experiment_spec {
    std::string command;  // synth | ablation | dcorr-table | movielens | face | theory-check

    // synthetic scenarios
    int n = 100;
    int m = 100;
    int r = 5;
    double eta = 0.1;
    double obs_frac = 0.8;
    int m_a = 60;
    std::vector<int> widths{40};
    std::uint64_t scenario_seed = 0;

    // movielens
    std::string data_dir;
    std::vector<std::string> genres;
    double train_frac = 0.8;

    // face
    std::string image_path;
    int block_size = 30;
    int region_blocks = 13;
    double missing_frac = 0.3;

    // theory-check
    int trials = 200;
    int check_n = 32;
    int check_m_a = 8;
    int check_m_b = 8;
    int check_r = 3;

    // execution
    solver_config solver;
    std::vector<std::string> algorithms;  // empty: per-command default set
    int repeat = 1;
    std::uint64_t seed_base = 0;
    std::vector<std::uint64_t> seeds;  // explicit run seeds; overrides repeat
    int threads = 1;
    std::string out_dir = "out";
};

// One results.csv row; norm_perm_err and the RMSE/objective columns repeat
// across the block rows of a run.
struct result_row {
    std::uint64_t seed = 0;
    std::string algorithm;
    int block = 1;  // 1-based
    int d_hamming = -1;
    double norm_perm_err = 0.0;
    double rmse_train = 0.0;
    double rmse_test = 0.0;
    double objective = 0.0;
    int iters = 0;
    long long wall_ms = 0;
};

experiment_spec load_spec(const std::string& json_path);

// Runs the experiment, writing results.csv, summary.json, and plots under
// spec.out_dir.  Returns a process exit status.
int run_experiment(const experiment_spec& spec);

int cli_main(int argc, char** argv);

}  // namespace unshuffle
