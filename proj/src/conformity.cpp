#include "scpo/conformity.hpp"

#include <stdexcept>
#include <string>

namespace scpo {

Eigen::VectorXd ThetaMatrix::flatten() const {
    // column-major stacking, matching the flat index convention
    return Eigen::Map<const Eigen::VectorXd>(entries.data(), entries.size());
}

ThetaMatrix ThetaMatrix::unflatten(const Eigen::VectorXd& flat, Eigen::Index m, Eigen::Index c) {
    if (flat.size() != m * c) {
        throw std::invalid_argument("unflatten: vector of length " + std::to_string(flat.size()) +
                                    " does not fill a " + std::to_string(m) + "x" + std::to_string(c) +
                                    " matrix");
    }
    ThetaMatrix t;
    t.entries = Eigen::Map<const Eigen::MatrixXd>(flat.data(), m, c);
    return t;
}

Eigen::VectorXd SparseGradient::to_dense() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
    for (const auto& [j, v] : entries) out(j) = v;
    return out;
}

ScoreRow linear_scores(const ThetaMatrix& theta, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != theta.feature_count()) {
        throw std::invalid_argument("linear_scores: x has " + std::to_string(x.size()) +
                                    " entries, theta expects " + std::to_string(theta.feature_count()));
    }
    return theta.entries.transpose() * x;
}

SparseGradient linear_score_grad(const ThetaMatrix& theta, const Eigen::Ref<const Eigen::VectorXd>& x,
                                 int label) {
    if (x.size() != theta.feature_count()) {
        throw std::invalid_argument("linear_score_grad: x has " + std::to_string(x.size()) +
                                    " entries, theta expects " + std::to_string(theta.feature_count()));
    }
    if (label < 1 || label > theta.class_count()) {
        throw std::invalid_argument("linear_score_grad: label " + std::to_string(label) +
                                    " out of range 1.." + std::to_string(theta.class_count()));
    }
    const Eigen::Index m = theta.feature_count();
    SparseGradient grad;
    grad.size = theta.param_count();
    grad.entries.reserve(static_cast<std::size_t>(m));
    const Eigen::Index base = m * (label - 1);
    for (Eigen::Index a = 0; a < m; ++a) {
        if (x(a) != 0.0) grad.entries.emplace_back(base + a, x(a));
    }
    return grad;
}

} // namespace scpo
