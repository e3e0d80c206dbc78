#include "unshuffle/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "unshuffle/completion.hpp"
#include "unshuffle/rng.hpp"
#include "unshuffle/theory.hpp"

namespace unshuffle {

namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string>& known_commands() {
    static const std::set<std::string> c{"synth", "ablation", "dcorr-table", "movielens", "face", "theory-check"};
    return c;
}

const std::set<std::string>& known_algorithms() {
    static const std::set<std::string> a{"m3o", "m3o-as", "m3o-de", "baseline", "mus", "oracle", "sic", "sir"};
    return a;
}

std::vector<std::string> default_algorithms(const std::string& command) {
    if (command == "ablation") return {"m3o", "m3o-as", "m3o-de"};
    if (command == "dcorr-table") return {"m3o"};
    if (command == "movielens") return {"m3o", "baseline", "mus", "oracle", "sic", "sir"};
    if (command == "face") return {"m3o"};
    if (command == "theory-check") return {};
    return {"m3o", "baseline", "mus"};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double terminal_lambda(const solver_config& cfg) {
    return cfg.lambda_sched.is_fixed ? cfg.lambda_sched.value : cfg.lambda_sched.floor;
}

// ---------------------------------------------------------------- spec I/O

solver_config parse_solver(const json& j) {
    solver_config cfg;
    cfg.omega = j.value("omega", cfg.omega);
    cfg.outer_iters = j.value("outer_iters", cfg.outer_iters);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.eps_ent_init = j.value("eps_ent_init", cfg.eps_ent_init);
    cfg.eps_tol = j.value("eps_tol", cfg.eps_tol);
    cfg.sinkhorn_max_iter = j.value("sinkhorn_max_iter", cfg.sinkhorn_max_iter);
    cfg.step_cap = j.value("step_cap", cfg.step_cap);
    cfg.warm_start_duals = j.value("warm_start_duals", cfg.warm_start_duals);
    cfg.prox_scaled_by_rho = j.value("prox_scaled_by_rho", cfg.prox_scaled_by_rho);
    cfg.stepsize_col_max = j.value("stepsize_col_max", cfg.stepsize_col_max);
    cfg.baseline_inner_iters = j.value("baseline_inner_iters", cfg.baseline_inner_iters);
    cfg.eps_scale_from_cost = j.value("eps_scale_from_cost", cfg.eps_scale_from_cost);
    cfg.stall_rel_tol = j.value("stall_rel_tol", cfg.stall_rel_tol);
    cfg.anneal_burn_in = j.value("anneal_burn_in", cfg.anneal_burn_in);
    if (j.contains("anneal_omega")) cfg.anneal_omega = j.at("anneal_omega").get<double>();
    if (j.contains("rho_fixed")) cfg.rho_fixed = j.at("rho_fixed").get<double>();
    if (j.contains("lambda")) {
        const json& l = j.at("lambda");
        if (l.is_number()) {
            cfg.lambda_sched = lambda_schedule::fixed(l.get<double>());
        } else {
            cfg.lambda_sched = lambda_schedule::stepped(l.at("start").get<double>(), l.at("decrement").get<double>(),
                                                        l.at("floor").get<double>(), l.at("patience").get<int>());
        }
    }
    const std::string init = j.value("init", std::string("gaussian"));
    if (init == "gaussian")
        cfg.init = init_strategy::gaussian;
    else if (init == "spectral-rank-1")
        cfg.init = init_strategy::spectral_rank1;
    else
        throw std::invalid_argument("unknown init strategy: " + init);
    return cfg;
}

experiment_spec parse_spec(const json& j) {
    experiment_spec spec;
    spec.command = j.value("command", spec.command);
    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        spec.n = s.value("n", spec.n);
        spec.m = s.value("m", spec.m);
        spec.r = s.value("r", spec.r);
        spec.eta = s.value("eta", spec.eta);
        spec.obs_frac = s.value("obs_frac", spec.obs_frac);
        spec.m_a = s.value("m_a", spec.m_a);
        spec.widths = s.value("widths", spec.widths);
        spec.scenario_seed = s.value("seed", spec.scenario_seed);
        spec.data_dir = s.value("data_dir", spec.data_dir);
        spec.genres = s.value("genres", spec.genres);
        spec.train_frac = s.value("train_frac", spec.train_frac);
        spec.image_path = s.value("image", spec.image_path);
        spec.block_size = s.value("block_size", spec.block_size);
        spec.region_blocks = s.value("region_blocks", spec.region_blocks);
        spec.missing_frac = s.value("missing_frac", spec.missing_frac);
        spec.trials = s.value("trials", spec.trials);
        spec.check_n = s.value("check_n", spec.check_n);
        spec.check_m_a = s.value("check_m_a", spec.check_m_a);
        spec.check_m_b = s.value("check_m_b", spec.check_m_b);
        spec.check_r = s.value("check_r", spec.check_r);
    }
    if (j.contains("solver")) spec.solver = parse_solver(j.at("solver"));
    spec.algorithms = j.value("algorithms", spec.algorithms);
    spec.repeat = j.value("repeat", spec.repeat);
    spec.seed_base = j.value("seed_base", spec.seed_base);
    spec.seeds = j.value("seeds", spec.seeds);
    spec.threads = j.value("threads", spec.threads);
    spec.out_dir = j.value("out", spec.out_dir);
    return spec;
}

// ------------------------------------------------------------- algorithms

recovery_result run_oracle(const scenario& scen, const solver_config& cfg) {
    if (!scen.has_truth) throw std::invalid_argument("oracle needs ground-truth permutations");
    const double lam = terminal_lambda(cfg);
    dense_matrix x = scen.observed.data;
    dense_matrix xm = scen.observed.mask;
    for (int l = 0; l < scen.partition.d(); ++l) {
        const int off = scen.partition.offset(l);
        const int w = scen.partition.widths[static_cast<std::size_t>(l)];
        const permutation inv = scen.perms_true[static_cast<std::size_t>(l)].inverse();
        x.middleCols(off, w) = apply_rows(inv, scen.observed.data.middleCols(off, w));
        xm.middleCols(off, w) = apply_rows(inv, scen.observed.mask.middleCols(off, w));
    }
    const soft_impute_result si = soft_impute(masked_matrix(x, xm), lam, 1e-5, 500);
    recovery_result res;
    res.m_hat = si.m_hat;
    res.rounded_perms = scen.perms_true;
    res.converged = si.converged;
    res.objective_trace.push_back(assignment_objective(res.m_hat, scen.observed, scen.partition, res.rounded_perms, lam));
    res.stepsize_trace.push_back(0.0);
    res.entropy_trace.push_back(0.0);
    res.lambda_trace.push_back(lam);
    return res;
}

// Independent per-block completion; no correspondence is estimated.  For
// truth-frame metrics each block's fill is mapped back through the true
// permutation (evaluation bookkeeping: within-block predictions are frame
//-consistent on their own).
recovery_result run_sic(const scenario& scen, const solver_config& cfg) {
    if (!scen.has_truth) throw std::invalid_argument("per-block completion metrics need ground truth");
    const double lam = terminal_lambda(cfg);
    recovery_result res;
    res.m_hat = dense_matrix::Zero(scen.observed.rows(), scen.observed.cols());
    res.converged = true;
    if (scen.partition.m_a > 0) {
        const masked_matrix anchor(scen.observed.data.leftCols(scen.partition.m_a),
                                   scen.observed.mask.leftCols(scen.partition.m_a));
        res.m_hat.leftCols(scen.partition.m_a) = soft_impute(anchor, lam, 1e-5, 500).m_hat;
    }
    for (int l = 0; l < scen.partition.d(); ++l) {
        const int off = scen.partition.offset(l);
        const int w = scen.partition.widths[static_cast<std::size_t>(l)];
        const masked_matrix blk(scen.observed.data.middleCols(off, w), scen.observed.mask.middleCols(off, w));
        const dense_matrix fill = soft_impute(blk, lam, 1e-5, 500).m_hat;
        res.m_hat.middleCols(off, w) = apply_rows(scen.perms_true[static_cast<std::size_t>(l)].inverse(), fill);
    }
    return res;
}

recovery_result run_sir(const scenario& scen, const solver_config& cfg, std::uint64_t run_seed) {
    const double lam = terminal_lambda(cfg);
    const int n = static_cast<int>(scen.observed.rows());
    rng g(run_seed * 2654435761ULL + 17ULL);
    dense_matrix x = scen.observed.data;
    dense_matrix xm = scen.observed.mask;
    recovery_result res;
    for (int l = 0; l < scen.partition.d(); ++l) {
        const permutation q = random_permutation(n, std::nullopt, g.next_u64());
        const int off = scen.partition.offset(l);
        const int w = scen.partition.widths[static_cast<std::size_t>(l)];
        x.middleCols(off, w) = apply_rows(q.inverse(), scen.observed.data.middleCols(off, w));
        xm.middleCols(off, w) = apply_rows(q.inverse(), scen.observed.mask.middleCols(off, w));
        res.rounded_perms.push_back(q);
    }
    const soft_impute_result si = soft_impute(masked_matrix(x, xm), lam, 1e-5, 500);
    res.m_hat = si.m_hat;
    res.converged = si.converged;
    res.objective_trace.push_back(assignment_objective(res.m_hat, scen.observed, scen.partition, res.rounded_perms, lam));
    res.stepsize_trace.push_back(0.0);
    res.entropy_trace.push_back(0.0);
    res.lambda_trace.push_back(lam);
    return res;
}

recovery_result execute_algorithm(const std::string& name, const scenario& scen, const solver_config& base,
                                  std::uint64_t run_seed, const cost_provider* provider) {
    solver_config cfg = base;
    cfg.seed = run_seed;
    if (name == "m3o") return solve_m3o(scen.observed, scen.partition, cfg, provider);
    if (name == "m3o-as") {  // adaptive stepsize only: entropy never decays
        cfg.patience = std::numeric_limits<int>::max();
        return solve_m3o(scen.observed, scen.partition, cfg, provider);
    }
    if (name == "m3o-de") {  // decaying entropy only: stepsize pinned at the cap
        if (!cfg.rho_fixed) cfg.rho_fixed = cfg.step_cap;
        return solve_m3o(scen.observed, scen.partition, cfg, provider);
    }
    if (provider != nullptr) throw std::invalid_argument("only the min-max solvers support cost providers");
    if (name == "baseline") return solve_baseline(scen.observed, scen.partition, cfg);
    if (name == "mus") return solve_mus(scen.observed, scen.partition, cfg);
    if (name == "oracle") return run_oracle(scen, cfg);
    if (name == "sic") return run_sic(scen, cfg);
    if (name == "sir") return run_sir(scen, cfg, run_seed);
    throw std::invalid_argument("unknown algorithm: " + name);
}

struct seed_output {
    std::vector<result_row> rows;
    std::vector<std::string> errors;
    std::map<std::string, std::vector<double>> traces;  // objective per algorithm
    std::map<std::string, recovery_result> results;     // kept only when requested
};

seed_output run_seed_batch(const experiment_spec& spec, const scenario& scen, const cost_provider* provider,
                           std::uint64_t run_seed, bool keep_results) {
    seed_output out;
    const int d_metric = scen.has_truth ? static_cast<int>(scen.perms_true.size()) : scen.partition.d();
    for (const std::string& name : spec.algorithms) {
        const auto t0 = std::chrono::steady_clock::now();
        recovery_result res;
        bool failed = false;
        try {
            res = execute_algorithm(name, scen, spec.solver, run_seed, provider);
        } catch (const std::exception& e) {
            failed = true;
            out.errors.push_back("seed " + std::to_string(run_seed) + " " + name + ": " + e.what());
        }
        const auto wall =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();

        double nperr = kNan;
        std::vector<int> dh(static_cast<std::size_t>(std::max(d_metric, 1)), -1);
        if (!failed && scen.has_truth && res.rounded_perms.size() == scen.perms_true.size() &&
            !scen.perms_true.empty()) {
            int total = 0;
            for (std::size_t l = 0; l < scen.perms_true.size(); ++l) {
                dh[l] = d_hamming(res.rounded_perms[l], scen.perms_true[l]);
                total += dh[l];
            }
            nperr = static_cast<double>(total) / static_cast<double>(scen.perms_true.size());
        }
        double rmse_tr = kNan, rmse_te = kNan;
        if (!failed && scen.has_truth && res.m_hat.size() == scen.m_true.size()) {
            rmse_tr = rmse_masked(res.m_hat, scen.m_true, scen.train_mask_true);
            rmse_te = rmse_masked(res.m_hat, scen.m_true, scen.test_mask_true);
        }
        const double obj = !failed && !res.objective_trace.empty() ? res.objective_trace.back() : kNan;
        const int iters = failed ? 0 : static_cast<int>(res.objective_trace.size());

        for (int b = 0; b < std::max(d_metric, 1); ++b) {
            result_row row;
            row.seed = run_seed;
            row.algorithm = name;
            row.block = b + 1;
            row.d_hamming = dh[static_cast<std::size_t>(b)];
            row.norm_perm_err = nperr;
            row.rmse_train = rmse_tr;
            row.rmse_test = rmse_te;
            row.objective = obj;
            row.iters = iters;
            row.wall_ms = wall;
            out.rows.push_back(row);
        }
        if (!failed) {
            out.traces[name] = res.objective_trace;
            if (keep_results) out.results[name] = std::move(res);
        }
    }
    return out;
}

// ---------------------------------------------------------------- outputs

void write_results_csv(const std::string& path, const std::vector<result_row>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "seed,algorithm,block,d_hamming,norm_perm_err,rmse_train,rmse_test,objective,iters,wall_ms\n";
    for (const result_row& r : rows) {
        out << r.seed << ',' << r.algorithm << ',' << r.block << ',' << r.d_hamming << ',' << fmt(r.norm_perm_err)
            << ',' << fmt(r.rmse_train) << ',' << fmt(r.rmse_test) << ',' << fmt(r.objective) << ',' << r.iters << ','
            << r.wall_ms << '\n';
    }
}

struct aggregate {
    std::vector<double> values;
    void add(double v) {
        if (std::isfinite(v)) values.push_back(v);
    }
    json to_json() const {
        if (values.empty()) return nullptr;
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double stddev = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
        return {{"mean", mean},
                {"std", stddev},
                {"min", *std::min_element(values.begin(), values.end())},
                {"count", values.size()}};
    }
};

json summarize(const std::vector<result_row>& rows) {
    std::map<std::string, std::map<std::string, aggregate>> per_algo;
    std::map<std::string, std::set<std::uint64_t>> seeds_seen;
    for (const result_row& r : rows) {
        auto& agg = per_algo[r.algorithm];
        if (r.d_hamming >= 0) agg["d_hamming"].add(r.d_hamming);
        if (r.block == 1) {  // per-run scalars live on the first block row
            agg["norm_perm_err"].add(r.norm_perm_err);
            agg["rmse_train"].add(r.rmse_train);
            agg["rmse_test"].add(r.rmse_test);
            agg["objective"].add(r.objective);
        }
        seeds_seen[r.algorithm].insert(r.seed);
    }
    json out = json::object();
    for (auto& [name, aggs] : per_algo) {
        json entry;
        entry["runs"] = seeds_seen[name].size();
        for (auto& [metric, agg] : aggs) entry[metric] = agg.to_json();
        out[name] = entry;
    }
    return out;
}

const char* plot_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

void svg_line_plot(const std::string& path, const std::string& title,
                   const std::map<std::string, std::vector<double>>& series) {
    const double width = 720, height = 480, ml = 80, mr = 24, mt = 48, mb = 52;
    std::size_t max_len = 0;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -std::numeric_limits<double>::infinity();
    for (const auto& [name, ys] : series) {
        max_len = std::max(max_len, ys.size());
        for (double y : ys)
            if (std::isfinite(y)) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
    }
    if (max_len < 1 || !std::isfinite(ymin)) return;
    if (ymin == ymax) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const auto xs = [&](double i) { return ml + (max_len > 1 ? i / (static_cast<double>(max_len) - 1) * pw : pw / 2); };
    const auto ys_ = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double yv = ymin + (ymax - ymin) * t / 4.0;
        out << "<text x=\"" << ml - 8 << "\" y=\"" << ys_(yv) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv) << "</text>\n";
        out << "<line x1=\"" << ml - 4 << "\" y1=\"" << ys_(yv) << "\" x2=\"" << ml << "\" y2=\"" << ys_(yv)
            << "\" stroke=\"black\"/>\n";
        const double xv = (static_cast<double>(max_len) - 1) * t / 4.0;
        out << "<text x=\"" << xs(xv) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << static_cast<long>(std::lround(xv)) << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration</text>\n";
    std::size_t idx = 0;
    for (const auto& [name, data] : series) {
        out << "<polyline fill=\"none\" stroke=\"" << plot_color(idx) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < data.size(); ++i)
            if (std::isfinite(data[i])) out << xs(static_cast<double>(i)) << ',' << ys_(data[i]) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << ml + pw - 8 << "\" y=\"" << mt + 16 + 16 * static_cast<double>(idx)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << plot_color(idx)
            << "\">" << name << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
}

std::vector<std::uint64_t> run_seeds(const experiment_spec& spec) {
    if (!spec.seeds.empty()) return spec.seeds;
    std::vector<std::uint64_t> s;
    s.reserve(static_cast<std::size_t>(std::max(spec.repeat, 1)));
    for (int i = 0; i < std::max(spec.repeat, 1); ++i) s.push_back(spec.seed_base + static_cast<std::uint64_t>(i));
    return s;
}

void validate_spec(const experiment_spec& spec) {
    if (known_commands().count(spec.command) == 0)
        throw std::invalid_argument("unknown command: '" + spec.command + "'");
    for (const std::string& a : spec.algorithms)
        if (known_algorithms().count(a) == 0) throw std::invalid_argument("unknown algorithm: '" + a + "'");
    if (spec.command == "face")
        for (const std::string& a : spec.algorithms)
            if (a.rfind("m3o", 0) != 0)
                throw std::invalid_argument("the image (face) scenario supports only the min-max solvers");
    if (spec.repeat < 1) throw std::invalid_argument("repeat must be >= 1");
    if (spec.threads < 1) throw std::invalid_argument("threads must be >= 1");
}

int run_theory_check(const experiment_spec& spec) {
    const rank_check_report rep =
        generic_rank_check(spec.check_n, spec.check_m_a, spec.check_m_b, spec.check_r, spec.trials,
                           spec.scenario_seed);
    json out;
    out["command"] = "theory-check";
    out["n"] = spec.check_n;
    out["m_a"] = spec.check_m_a;
    out["m_b"] = spec.check_m_b;
    out["r"] = spec.check_r;
    out["trials"] = rep.trials;
    out["matches"] = rep.matches;
    out["equality_fraction"] = rep.fraction;
    out["failed_trials"] = rep.failed_trials;
    std::ofstream rf(spec.out_dir + "/report.json");
    if (!rf) throw std::runtime_error("cannot write report.json");
    rf << out.dump(2) << '\n';
    write_results_csv(spec.out_dir + "/results.csv", {});
    std::ofstream sf(spec.out_dir + "/summary.json");
    sf << out.dump(2) << '\n';
    return 0;
}

int run_face(const experiment_spec& spec) {
    const dense_matrix image = read_pgm(spec.image_path);
    const image_scenario is =
        shuffle_image_blocks(image, spec.block_size, spec.region_blocks, spec.missing_frac, spec.scenario_seed);
    write_pgm(spec.out_dir + "/corrupted.pgm", is.corrupted);
    write_pgm(spec.out_dir + "/original.pgm", image);

    experiment_spec eff = spec;
    if (eff.solver.init == init_strategy::spectral_rank1) {
        // Fill every tile independently, then keep the top singular direction
        // of the filled image as the starting estimate.
        const double lam = terminal_lambda(eff.solver);
        const int b = is.block_size;
        dense_matrix m1 = dense_matrix::Zero(image.rows(), image.cols());
        for (Eigen::Index r0 = 0; r0 + b <= image.rows(); r0 += b)
            for (Eigen::Index c0 = 0; c0 + b <= image.cols(); c0 += b) {
                const masked_matrix tile(is.corrupted.block(r0, c0, b, b), is.corrupted_mask.block(r0, c0, b, b));
                m1.block(r0, c0, b, b) = soft_impute(tile, lam, 1e-4, 300).m_hat;
            }
        const svd_factors f = svd(m1);
        eff.solver.init = init_strategy::provided;
        eff.solver.init_matrix = f.sigma(0) * f.u.col(0) * f.v.col(0).transpose();
    }

    const std::vector<std::uint64_t> seeds = run_seeds(eff);
    std::vector<result_row> rows;
    std::vector<std::string> errors;
    std::map<std::string, std::vector<double>> first_traces;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        seed_output out = run_seed_batch(eff, is.scen, is.provider.get(), seeds[i], true);
        rows.insert(rows.end(), out.rows.begin(), out.rows.end());
        errors.insert(errors.end(), out.errors.begin(), out.errors.end());
        if (i == 0) first_traces = out.traces;
        for (const auto& [name, res] : out.results) {
            const dense_matrix recovered = unshuffle_image(is, res.m_hat, res.rounded_perms);
            write_pgm(spec.out_dir + "/recovered_" + name + "_seed" + std::to_string(seeds[i]) + ".pgm", recovered);
        }
    }
    write_results_csv(spec.out_dir + "/results.csv", rows);
    json summary;
    summary["command"] = spec.command;
    summary["algorithms"] = summarize(rows);
    std::ofstream sf(spec.out_dir + "/summary.json");
    if (!sf) throw std::runtime_error("cannot write summary.json");
    sf << summary.dump(2) << '\n';
    if (!first_traces.empty())
        svg_line_plot(spec.out_dir + "/objective_trace.svg", "monitored objective, seed " + std::to_string(seeds[0]),
                      first_traces);
    if (!errors.empty()) {
        std::ofstream ef(spec.out_dir + "/errors.log");
        for (const std::string& e : errors) ef << e << '\n';
        std::cerr << errors.size() << " run(s) failed; see errors.log\n";
    }
    return 0;
}

}  // namespace

experiment_spec load_spec(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open config " + json_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(json_path + ": " + e.what());
    }
    return parse_spec(j);
}

int run_experiment(const experiment_spec& spec_in) {
    experiment_spec spec = spec_in;
    if (spec.algorithms.empty()) spec.algorithms = default_algorithms(spec.command);
    validate_spec(spec);
    std::filesystem::create_directories(spec.out_dir);

    if (spec.command == "theory-check") return run_theory_check(spec);
    if (spec.command == "face") return run_face(spec);

    const std::vector<std::uint64_t> seeds = run_seeds(spec);
    std::vector<seed_output> outputs(seeds.size());

    const auto worker_body = [&](std::size_t i) {
        scenario scen;
        if (spec.command == "movielens") {
            const std::vector<std::string>& genres = spec.genres.empty() ? movielens_default_genres() : spec.genres;
            scen = load_movielens(spec.data_dir, genres, spec.train_frac, seeds[i]);
        } else {
            block_partition part;
            part.m_a = spec.m_a;
            part.widths = spec.widths;
            scen = gen_synthetic(spec.n, spec.m, spec.r, spec.eta, part, spec.obs_frac, spec.scenario_seed);
        }
        outputs[i] = run_seed_batch(spec, scen, nullptr, seeds[i], false);
    };

    if (spec.threads <= 1 || seeds.size() <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) worker_body(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), seeds.size());
        pool.reserve(nt);
        for (std::size_t t = 0; t < nt; ++t)
            pool.emplace_back([&]() {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= seeds.size()) return;
                    worker_body(i);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::vector<result_row> rows;
    std::vector<std::string> errors;
    for (const seed_output& o : outputs) {
        rows.insert(rows.end(), o.rows.begin(), o.rows.end());
        errors.insert(errors.end(), o.errors.begin(), o.errors.end());
    }
    write_results_csv(spec.out_dir + "/results.csv", rows);
    json summary;
    summary["command"] = spec.command;
    summary["algorithms"] = summarize(rows);
    std::ofstream sf(spec.out_dir + "/summary.json");
    if (!sf) throw std::runtime_error("cannot write summary.json");
    sf << summary.dump(2) << '\n';
    if (!outputs.empty() && !outputs[0].traces.empty())
        svg_line_plot(spec.out_dir + "/objective_trace.svg", "monitored objective, seed " + std::to_string(seeds[0]),
                      outputs[0].traces);
    if (!errors.empty()) {
        std::ofstream ef(spec.out_dir + "/errors.log");
        for (const std::string& e : errors) ef << e << '\n';
        std::cerr << errors.size() << " run(s) failed; see errors.log\n";
    }
    return 0;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"low-rank matrix recovery under unknown per-block row correspondence"};
    std::string command, config_path, out_dir, seeds_csv;
    int threads = 0;
    app.add_option("command", command, "synth | ablation | dcorr-table | movielens | face | theory-check")
        ->required();
    app.add_option("--config", config_path, "experiment JSON document")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seeds", seeds_csv, "comma-separated run seeds (overrides config)");
    app.add_option("--threads", threads, "concurrent runs (overrides config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        experiment_spec spec = load_spec(config_path);
        spec.command = command;
        if (!out_dir.empty()) spec.out_dir = out_dir;
        if (threads > 0) spec.threads = threads;
        if (!seeds_csv.empty()) {
            spec.seeds.clear();
            std::stringstream ss(seeds_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) spec.seeds.push_back(std::stoull(tok));
        }
        return run_experiment(spec);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace unshuffle
