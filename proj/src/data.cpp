#include "unshuffle/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "unshuffle/completion.hpp"
#include "unshuffle/rng.hpp"

namespace unshuffle {

namespace {

// Exactly `keep` positions chosen uniformly without replacement, column-major
// linear indexing.
dense_matrix uniform_mask(Eigen::Index rows, Eigen::Index cols, Eigen::Index keep, rng& g) {
    const Eigen::Index total = rows * cols;
    if (keep < 0 || keep > total) throw std::invalid_argument("mask cardinality out of range");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), 0);
    for (Eigen::Index i = total - 1; i > 0; --i)
        std::swap(idx[static_cast<std::size_t>(i)], idx[g.bounded(static_cast<std::uint64_t>(i + 1))]);
    dense_matrix mask = dense_matrix::Zero(rows, cols);
    for (Eigen::Index k = 0; k < keep; ++k) {
        const Eigen::Index e = idx[static_cast<std::size_t>(k)];
        mask(e % rows, e / rows) = 1.0;
    }
    return mask;
}

void write_matrix_csv(const std::string& path, const dense_matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

}  // namespace

scenario gen_synthetic(int n, int m, int r, double eta, const block_partition& partition, double obs_frac,
                       std::uint64_t seed) {
    partition.validate(m);
    if (r > std::min(n, m)) throw std::invalid_argument("rank exceeds matrix dimensions");
    if (obs_frac <= 0.0 || obs_frac > 1.0) throw std::invalid_argument("observation fraction must lie in (0, 1]");
    rng g(seed);
    dense_matrix rf(n, r), ef(r, m), w(n, m);
    for (Eigen::Index i = 0; i < rf.rows(); ++i)
        for (Eigen::Index j = 0; j < rf.cols(); ++j) rf(i, j) = g.gaussian();
    for (Eigen::Index i = 0; i < ef.rows(); ++i)
        for (Eigen::Index j = 0; j < ef.cols(); ++j) ef(i, j) = g.gaussian();
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = g.gaussian();

    scenario s;
    s.partition = partition;
    s.has_truth = true;
    s.m_true = rf * ef + eta * w;

    dense_matrix shuffled = s.m_true;
    for (int l = 0; l < partition.d(); ++l) {
        const permutation p = random_permutation(n, std::nullopt, g.next_u64());
        const int off = partition.offset(l);
        const int w_l = partition.widths[static_cast<std::size_t>(l)];
        shuffled.middleCols(off, w_l) = apply_rows(p, s.m_true.middleCols(off, w_l));
        s.perms_true.push_back(p);
    }

    const auto keep = static_cast<Eigen::Index>(std::llround(obs_frac * static_cast<double>(n) * m));
    const dense_matrix mask = uniform_mask(n, m, keep, g);
    s.observed = masked_matrix(shuffled.cwiseProduct(mask), mask);

    s.train_mask_true = mask;
    for (int l = 0; l < partition.d(); ++l) {
        const int off = partition.offset(l);
        const int w_l = partition.widths[static_cast<std::size_t>(l)];
        s.train_mask_true.middleCols(off, w_l) =
            apply_rows(s.perms_true[static_cast<std::size_t>(l)].inverse(), mask.middleCols(off, w_l));
    }
    s.test_mask_true = (1.0 - s.train_mask_true.array()).matrix();
    return s;
}

double rmse_masked(const dense_matrix& a, const dense_matrix& b, const dense_matrix& mask) {
    const double cnt = mask.sum();
    if (cnt == 0.0) return 0.0;
    return std::sqrt(mask.cwiseProduct(a - b).squaredNorm() / cnt);
}

const std::vector<std::string>& movielens_default_genres() {
    static const std::vector<std::string> g{"Comedy", "Romance", "Drama", "Action", "Thriller"};
    return g;
}

namespace {

int movielens_genre_flag(const std::string& name) {
    static const std::vector<std::string> order{"unknown", "Action",  "Adventure", "Animation", "Children's",
                                                "Comedy",  "Crime",   "Documentary", "Drama",   "Fantasy",
                                                "Film-Noir", "Horror", "Musical",  "Mystery",   "Romance",
                                                "Sci-Fi",  "Thriller", "War",      "Western"};
    const auto it = std::find(order.begin(), order.end(), name);
    if (it == order.end()) throw std::invalid_argument("unknown genre name: " + name);
    return static_cast<int>(it - order.begin());
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

[[noreturn]] void parse_fail(const std::string& file, int lineno, const std::string& what) {
    throw std::runtime_error(file + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace

scenario load_movielens(const std::string& dir, const std::vector<std::string>& genres, double train_frac,
                        std::uint64_t seed) {
    if (genres.size() < 2) throw std::invalid_argument("need an anchor genre plus at least one permuted genre");
    if (train_frac <= 0.0 || train_frac > 1.0) throw std::invalid_argument("train fraction must lie in (0, 1]");
    std::vector<int> flag_pos;
    flag_pos.reserve(genres.size());
    for (const auto& gname : genres) flag_pos.push_back(movielens_genre_flag(gname));

    // Movie -> block, by the listed genre priority.
    const std::string item_path = dir + "/u.item";
    std::ifstream item_file(item_path);
    if (!item_file) throw std::runtime_error("cannot open " + item_path);
    std::map<int, int> block_of;  // ordered: columns come out sorted by movie id
    std::string line;
    int lineno = 0;
    while (std::getline(item_file, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::vector<std::string> f = split(line, '|');
        if (f.size() < 24) parse_fail(item_path, lineno, "expected 24 pipe-separated fields");
        int movie = 0;
        try {
            movie = std::stoi(f[0]);
        } catch (const std::exception&) {
            parse_fail(item_path, lineno, "bad movie id '" + f[0] + "'");
        }
        for (std::size_t b = 0; b < genres.size(); ++b) {
            const std::string& flag = f[static_cast<std::size_t>(5 + flag_pos[b])];
            if (flag == "1") {
                block_of[movie] = static_cast<int>(b);
                break;
            }
            if (flag != "0") parse_fail(item_path, lineno, "genre flag must be 0 or 1, got '" + flag + "'");
        }
    }

    // Column layout: anchor block first, then the permuted blocks in order;
    // ascending movie id within a block.
    const int nblocks = static_cast<int>(genres.size());
    std::vector<int> width(static_cast<std::size_t>(nblocks), 0);
    for (const auto& [movie, b] : block_of) ++width[static_cast<std::size_t>(b)];
    std::vector<int> next_col(static_cast<std::size_t>(nblocks), 0);
    for (int b = 1; b < nblocks; ++b)
        next_col[static_cast<std::size_t>(b)] =
            next_col[static_cast<std::size_t>(b - 1)] + width[static_cast<std::size_t>(b - 1)];
    std::map<int, int> col_of;
    for (const auto& [movie, b] : block_of) col_of[movie] = next_col[static_cast<std::size_t>(b)]++;

    struct rating_row {
        int user, col;
        double value;
    };
    const std::string data_path = dir + "/u.data";
    std::ifstream data_file(data_path);
    if (!data_file) throw std::runtime_error("cannot open " + data_path);
    std::vector<rating_row> ratings;
    int max_user = 0;
    lineno = 0;
    while (std::getline(data_file, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::vector<std::string> f = split(line, '\t');
        if (f.size() < 3) parse_fail(data_path, lineno, "expected tab-separated user, item, rating");
        int user = 0, item = 0;
        double value = 0.0;
        try {
            user = std::stoi(f[0]);
            item = std::stoi(f[1]);
            value = std::stod(f[2]);
        } catch (const std::exception&) {
            parse_fail(data_path, lineno, "bad numeric field");
        }
        if (user <= 0) parse_fail(data_path, lineno, "user id must be positive");
        max_user = std::max(max_user, user);
        const auto it = col_of.find(item);
        if (it == col_of.end()) continue;  // movie outside the requested genres
        ratings.push_back({user - 1, it->second, value});
    }

    const int n = max_user;
    const int m = next_col.back();
    scenario s;
    s.partition.m_a = width[0];
    s.partition.widths.assign(width.begin() + 1, width.end());
    s.has_truth = true;
    s.m_true = dense_matrix::Zero(n, m);
    for (const auto& r : ratings) s.m_true(r.user, r.col) = r.value;

    rng g(seed);
    for (int b = 1; b < nblocks; ++b) s.perms_true.push_back(random_permutation(n, std::nullopt, g.next_u64()));

    // Uniform train/test split over the kept ratings.
    std::vector<std::size_t> order(ratings.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = ratings.size(); i > 1; --i)
        std::swap(order[i - 1], order[g.bounded(static_cast<std::uint64_t>(i))]);
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(ratings.size())));

    s.train_mask_true = dense_matrix::Zero(n, m);
    s.test_mask_true = dense_matrix::Zero(n, m);
    dense_matrix obs_data = dense_matrix::Zero(n, m);
    dense_matrix obs_mask = dense_matrix::Zero(n, m);
    for (std::size_t k = 0; k < ratings.size(); ++k) {
        const rating_row& r = ratings[order[k]];
        if (k < n_train) {
            s.train_mask_true(r.user, r.col) = 1.0;
            int row = r.user;
            if (r.col >= s.partition.m_a) {
                int b = 0;
                while (s.partition.offset(b) + s.partition.widths[static_cast<std::size_t>(b)] <= r.col) ++b;
                row = s.perms_true[static_cast<std::size_t>(b)](r.user);
            }
            obs_data(row, r.col) = r.value;
            obs_mask(row, r.col) = 1.0;
        } else {
            s.test_mask_true(r.user, r.col) = 1.0;
        }
    }
    s.observed = masked_matrix(obs_data, obs_mask);
    return s;
}

namespace {

class image_block_provider final : public cost_provider {
  public:
    image_block_provider(std::vector<dense_matrix> data, std::vector<dense_matrix> masks,
                         std::vector<std::pair<int, int>> slots, int block_size)
        : data_(std::move(data)), masks_(std::move(masks)), slots_(std::move(slots)), b_(block_size) {
        masked_.reserve(data_.size());
        for (std::size_t j = 0; j < data_.size(); ++j) masked_.push_back(data_[j].cwiseProduct(masks_[j]));
    }

    int block_count() const override { return 1; }
    int items(int) const override { return static_cast<int>(data_.size()); }

    cost_matrix cost(const dense_matrix& m_hat, int) const override {
        const int k = items(0);
        cost_matrix c(k, k);
        for (int i = 0; i < k; ++i) {
            const auto est = m_hat.block(slots_[static_cast<std::size_t>(i)].first,
                                         slots_[static_cast<std::size_t>(i)].second, b_, b_);
            for (int j = 0; j < k; ++j)
                c(i, j) = (masks_[static_cast<std::size_t>(j)].cwiseProduct(est) - masked_[static_cast<std::size_t>(j)])
                              .squaredNorm();
        }
        return c;
    }

    void apply_gradient(dense_matrix& m_hat, int, const transport_plan& plan, double rho) const override {
        const int k = items(0);
        for (int i = 0; i < k; ++i) {
            dense_matrix acc_mask = dense_matrix::Zero(b_, b_);
            dense_matrix acc_data = dense_matrix::Zero(b_, b_);
            for (int j = 0; j < k; ++j) {
                acc_mask += plan(i, j) * masks_[static_cast<std::size_t>(j)];
                acc_data += plan(i, j) * masked_[static_cast<std::size_t>(j)];
            }
            auto est = m_hat.block(slots_[static_cast<std::size_t>(i)].first,
                                   slots_[static_cast<std::size_t>(i)].second, b_, b_);
            est -= rho * 2.0 * (est.cwiseProduct(acc_mask) - acc_data);
        }
    }

    const std::vector<dense_matrix>& block_data() const { return data_; }
    const std::vector<dense_matrix>& block_masks() const { return masks_; }
    const std::vector<std::pair<int, int>>& block_slots() const { return slots_; }

  private:
    std::vector<dense_matrix> data_;    // observed shuffled tiles
    std::vector<dense_matrix> masks_;   // per-tile observation masks
    std::vector<dense_matrix> masked_;  // data .* mask, precomputed
    std::vector<std::pair<int, int>> slots_;
    int b_;
};

}  // namespace

image_scenario shuffle_image_blocks(const dense_matrix& image, int block_size, int region_blocks,
                                    double missing_frac, std::uint64_t seed) {
    const int h = static_cast<int>(image.rows());
    const int w = static_cast<int>(image.cols());
    if (block_size <= 0 || h % block_size != 0 || w % block_size != 0)
        throw std::invalid_argument("image dimensions must be divisible by the block size");
    const int gw = w / block_size;
    const int gh = h / block_size;
    if (region_blocks <= 0 || region_blocks > gh * gw)
        throw std::invalid_argument("region block count exceeds the block grid");
    if (missing_frac < 0.0 || missing_frac >= 1.0)
        throw std::invalid_argument("missing fraction must lie in [0, 1)");

    std::vector<std::pair<int, int>> slots;
    slots.reserve(static_cast<std::size_t>(region_blocks));
    for (int q = 0; q < region_blocks; ++q)
        slots.emplace_back((q / gw) * block_size, (q % gw) * block_size);

    rng g(seed);
    const permutation p = random_permutation(region_blocks, std::nullopt, g.next_u64());
    const auto keep = static_cast<Eigen::Index>(
        std::llround((1.0 - missing_frac) * static_cast<double>(h) * static_cast<double>(w)));
    const dense_matrix mask = uniform_mask(h, w, keep, g);

    // Observed tile at slot p(q) carries the true content of slot q.
    dense_matrix corrupted = image;
    for (int q = 0; q < region_blocks; ++q) {
        const auto [r1, c1] = slots[static_cast<std::size_t>(p(q))];
        const auto [r0, c0] = slots[static_cast<std::size_t>(q)];
        corrupted.block(r1, c1, block_size, block_size) = image.block(r0, c0, block_size, block_size);
    }

    dense_matrix region = dense_matrix::Zero(h, w);
    for (const auto& [r0, c0] : slots) region.block(r0, c0, block_size, block_size).setOnes();

    image_scenario is;
    is.block_size = block_size;
    is.region_blocks = region_blocks;
    is.corrupted = corrupted.cwiseProduct(mask);
    is.corrupted_mask = mask;

    const dense_matrix anchor_mask = mask.cwiseProduct((1.0 - region.array()).matrix());
    is.scen.observed = masked_matrix(corrupted.cwiseProduct(anchor_mask), anchor_mask);
    is.scen.partition.m_a = w;  // unused: the provider supplies the block structure
    is.scen.has_truth = true;
    is.scen.m_true = image;
    is.scen.perms_true.push_back(p);
    is.scen.train_mask_true = mask;
    for (int q = 0; q < region_blocks; ++q) {
        const auto [r1, c1] = slots[static_cast<std::size_t>(p(q))];
        const auto [r0, c0] = slots[static_cast<std::size_t>(q)];
        is.scen.train_mask_true.block(r0, c0, block_size, block_size) =
            mask.block(r1, c1, block_size, block_size);
    }
    is.scen.test_mask_true = (1.0 - is.scen.train_mask_true.array()).matrix();

    std::vector<dense_matrix> tiles, tile_masks;
    tiles.reserve(static_cast<std::size_t>(region_blocks));
    tile_masks.reserve(static_cast<std::size_t>(region_blocks));
    for (const auto& [r0, c0] : slots) {
        tiles.push_back(corrupted.block(r0, c0, block_size, block_size));
        tile_masks.push_back(mask.block(r0, c0, block_size, block_size));
    }
    is.provider = std::make_shared<image_block_provider>(std::move(tiles), std::move(tile_masks), slots, block_size);
    return is;
}

dense_matrix unshuffle_image(const image_scenario& is, const dense_matrix& m_hat,
                             const std::vector<permutation>& sigma) {
    if (sigma.size() != 1) throw std::invalid_argument("one tile permutation expected");
    const auto* prov = dynamic_cast<const image_block_provider*>(is.provider.get());
    if (prov == nullptr) throw std::invalid_argument("scenario does not carry an image tile provider");
    const auto& obs = is.scen.observed;
    dense_matrix out = obs.mask.cwiseProduct(obs.data) + (1.0 - obs.mask.array()).matrix().cwiseProduct(m_hat);
    const int b = is.block_size;
    for (int q = 0; q < is.region_blocks; ++q) {
        const int src = sigma[0](q);
        const auto [r0, c0] = prov->block_slots()[static_cast<std::size_t>(q)];
        const dense_matrix& dm = prov->block_masks()[static_cast<std::size_t>(src)];
        out.block(r0, c0, b, b) =
            dm.cwiseProduct(prov->block_data()[static_cast<std::size_t>(src)]) +
            (1.0 - dm.array()).matrix().cwiseProduct(out.block(r0, c0, b, b));
    }
    return out;
}

dense_matrix read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    auto next_token = [&in, &path]() {
        std::string tok;
        int ch = in.get();
        while (ch != EOF) {
            if (ch == '#') {
                while (ch != EOF && ch != '\n') ch = in.get();
            } else if (std::isspace(ch) != 0) {
                ch = in.get();
            } else {
                break;
            }
        }
        while (ch != EOF && std::isspace(ch) == 0) {
            tok.push_back(static_cast<char>(ch));
            ch = in.get();
        }
        if (tok.empty()) throw std::runtime_error(path + ": truncated header");
        return tok;
    };
    if (next_token() != "P5") throw std::runtime_error(path + ": not a binary (P5) PGM file");
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w <= 0 || h <= 0) throw std::runtime_error(path + ": bad dimensions");
    if (maxval != 255) throw std::runtime_error(path + ": only maxval 255 supported");
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
        throw std::runtime_error(path + ": truncated pixel data");
    dense_matrix m(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            m(i, j) = buf[static_cast<std::size_t>(i) * static_cast<std::size_t>(w) + static_cast<std::size_t>(j)] /
                      255.0;
    return m;
}

void write_pgm(const std::string& path, const dense_matrix& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
    for (Eigen::Index i = 0; i < image.rows(); ++i)
        for (Eigen::Index j = 0; j < image.cols(); ++j) {
            const double v = std::clamp(image(i, j), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
}

void save_scenario(const scenario& s, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["rows"] = s.observed.rows();
    manifest["cols"] = s.observed.cols();
    manifest["anchor_width"] = s.partition.m_a;
    manifest["block_widths"] = s.partition.widths;
    manifest["has_truth"] = s.has_truth;
    if (s.has_truth) {
        std::vector<std::vector<int>> perms;
        perms.reserve(s.perms_true.size());
        for (const auto& p : s.perms_true) perms.push_back(p.to_one_based());
        manifest["true_permutations"] = perms;
    }
    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("cannot write " + dir + "/manifest.json");
    mf << manifest.dump(2) << '\n';
    write_matrix_csv(dir + "/observed_data.csv", s.observed.data);
    write_matrix_csv(dir + "/observed_mask.csv", s.observed.mask);
    if (s.has_truth) {
        write_matrix_csv(dir + "/m_true.csv", s.m_true);
        write_matrix_csv(dir + "/train_mask.csv", s.train_mask_true);
        write_matrix_csv(dir + "/test_mask.csv", s.test_mask_true);
    }
}

}  // namespace unshuffle
