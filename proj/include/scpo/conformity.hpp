#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace scpo {

/// Conformity scores of one example over all C labels; entry y-1 is A(x, y).
using ScoreRow = Eigen::VectorXd;

/// m x C parameter matrix; column y-1 is the parameter sub-vector for label y.
/// The flat parameter vector of length p = C*m stacks the columns in order,
/// flat index = row + m*(column), 0-based.
struct ThetaMatrix {
    Eigen::MatrixXd entries;

    ThetaMatrix() = default;
    ThetaMatrix(Eigen::Index m, Eigen::Index c) : entries(Eigen::MatrixXd::Zero(m, c)) {}
    explicit ThetaMatrix(Eigen::MatrixXd e) : entries(std::move(e)) {}

    Eigen::Index feature_count() const { return entries.rows(); }
    Eigen::Index class_count() const { return entries.cols(); }
    Eigen::Index param_count() const { return entries.size(); }

    Eigen::VectorXd flatten() const;
    static ThetaMatrix unflatten(const Eigen::VectorXd& flat, Eigen::Index m, Eigen::Index c);
};

/// Gradient of one score with respect to the flat parameter vector. For the
/// linear measure at most m entries are nonzero, so it is kept sparse.
struct SparseGradient {
    Eigen::Index size = 0; // p
    std::vector<std::pair<Eigen::Index, double>> entries; // (flat index, value)

    Eigen::VectorXd to_dense() const;
};

/// Anything that can score an example against every label. Implementations
/// are immutable once built and safe for concurrent read-only use.
class ConformityScorer {
public:
    virtual ~ConformityScorer() = default;
    virtual Eigen::Index feature_count() const = 0;
    virtual Eigen::Index class_count() const = 0;
    virtual ScoreRow score_all(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
};

/// scores[y-1] = dot(theta column y-1, x)
ScoreRow linear_scores(const ThetaMatrix& theta, const Eigen::Ref<const Eigen::VectorXd>& x);

/// d A(x, y) / d theta_j: x_a at the flat index for (row a, column y), else 0.
/// `label` is 1-based.
SparseGradient linear_score_grad(const ThetaMatrix& theta, const Eigen::Ref<const Eigen::VectorXd>& x,
                                 int label);

class LinearScorer final : public ConformityScorer {
public:
    explicit LinearScorer(ThetaMatrix theta) : theta_(std::move(theta)) {}

    Eigen::Index feature_count() const override { return theta_.feature_count(); }
    Eigen::Index class_count() const override { return theta_.class_count(); }
    ScoreRow score_all(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
        return linear_scores(theta_, x);
    }
    const ThetaMatrix& theta() const { return theta_; }

private:
    ThetaMatrix theta_;
};

} // namespace scpo
