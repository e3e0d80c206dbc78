#include "unshuffle/lamat.hpp"

#include <Eigen/SVD>
#include <stdexcept>

namespace unshuffle {

masked_matrix::masked_matrix(dense_matrix d, dense_matrix m) : data(std::move(d)), mask(std::move(m)) {
    if (data.rows() != mask.rows() || data.cols() != mask.cols())
        throw std::invalid_argument("masked_matrix: data/mask shape mismatch");
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
        for (Eigen::Index i = 0; i < mask.rows(); ++i)
            if (mask(i, j) != 0.0 && mask(i, j) != 1.0)
                throw std::invalid_argument("masked_matrix: mask entries must be 0 or 1");
}

masked_matrix masked_matrix::block(Eigen::Index col0, Eigen::Index width) const {
    masked_matrix out;
    out.data = data.middleCols(col0, width);
    out.mask = mask.middleCols(col0, width);
    return out;
}

svd_factors svd(const dense_matrix& x) {
    if (!x.allFinite()) throw std::invalid_argument("svd: non-finite input");
    Eigen::BDCSVD<dense_matrix> f(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (f.info() != Eigen::Success) throw std::runtime_error("svd: factorization did not converge");
    return {f.matrixU(), f.singularValues(), f.matrixV()};
}

double nuclear_norm(const dense_matrix& x) {
    if (!x.allFinite()) throw std::invalid_argument("nuclear_norm: non-finite input");
    Eigen::BDCSVD<dense_matrix> f(x);
    if (f.info() != Eigen::Success) throw std::runtime_error("nuclear_norm: svd failed");
    return f.singularValues().sum();
}

dense_matrix prox_nuclear(const dense_matrix& x, double lam) {
    if (lam < 0) throw std::invalid_argument("prox_nuclear: negative threshold");
    svd_factors f = svd(x);
    Eigen::VectorXd s = (f.sigma.array() - lam).max(0.0).matrix();
    return f.u * s.asDiagonal() * f.v.transpose();
}

dense_matrix mask_project(const masked_matrix& x, bool complement) {
    if (complement) return x.data.cwiseProduct((1.0 - x.mask.array()).matrix());
    return x.data.cwiseProduct(x.mask);
}

int numeric_rank(const dense_matrix& x, double rel_tol) {
    Eigen::BDCSVD<dense_matrix> f(x);
    const Eigen::VectorXd& s = f.singularValues();
    if (s.size() == 0 || s(0) <= 0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

}  // namespace unshuffle
