#include "scpo/surrogate.hpp"

#include "scpo/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace scpo {

Transform parse_transform(const std::string& name) {
    if (name == "identity") return Transform::identity;
    if (name == "log") return Transform::log;
    if (name == "neg-inverse" || name == "neg_inverse") return Transform::neg_inverse;
    if (name == "neg-inverse-square" || name == "neg_inverse_square") return Transform::neg_inverse_square;
    throw std::invalid_argument("unknown transform '" + name +
                                "' (expected identity|log|neg-inverse|neg-inverse-square)");
}

std::string transform_name(Transform kind) {
    switch (kind) {
        case Transform::identity: return "identity";
        case Transform::log: return "log";
        case Transform::neg_inverse: return "neg-inverse";
        case Transform::neg_inverse_square: return "neg-inverse-square";
    }
    return "identity";
}

void Hyperparams::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (!(rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be non-negative");
    if (q == 0.0) throw std::invalid_argument("q must be non-zero");
}

double sigmoid(double a, double gamma) {
    const double z = gamma * a;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

SurrogateEval evaluate(const ThetaMatrix& theta, const Dataset& train, const Hyperparams& hp,
                       const InefficiencyMeasure& ineff) {
    const Eigen::Index k = train.row_count();
    const Eigen::Index m = train.feature_count();
    const auto c = static_cast<Eigen::Index>(train.class_count());
    if (k == 0) throw DataError("evaluate: empty training data");
    if (theta.feature_count() != m || theta.class_count() != c) {
        throw std::invalid_argument("evaluate: theta is " + std::to_string(theta.feature_count()) + "x" +
                                    std::to_string(theta.class_count()) + ", data expects " +
                                    std::to_string(m) + "x" + std::to_string(c));
    }
    if (!theta.entries.allFinite()) throw std::invalid_argument("evaluate: theta has non-finite entries");

    const double kd = static_cast<double>(k);

    // scores A = X T and the smoothed indicators sigma(gamma (A - q))
    const Eigen::MatrixXd scores = train.features * theta.entries;
    Eigen::ArrayXXd sig(k, c);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index y = 0; y < c; ++y) {
            sig(i, y) = sigmoid(scores(i, y) - hp.q, hp.gamma);
        }
    }

    SurrogateEval eval;
    eval.soft_sizes = sig.rowwise().sum().matrix();

    // sigma at the true label is the smoothed per-example coverage
    Eigen::ArrayXd sig_alpha(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        sig_alpha(i) = sig(i, train.labels[static_cast<std::size_t>(i)] - 1);
    }
    eval.validity_gap = sig_alpha.mean() - (1.0 - hp.epsilon);

    double mean_cost = 0.0;
    Eigen::ArrayXd f_prime(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        mean_cost += ineff.f(eval.soft_sizes(i));
        f_prime(i) = ineff.f_prime(eval.soft_sizes(i));
    }
    mean_cost /= kd;
    eval.loss = mean_cost + hp.lambda * eval.validity_gap * eval.validity_gap;

    // dL/dT, assembled in matrix shape then flattened column-major.
    // Cost term: (gamma/k) X^T [ f'(s_i) * sigma * (1 - sigma) ]
    const Eigen::ArrayXXd slope = sig * (1.0 - sig);
    Eigen::ArrayXXd weighted = slope.colwise() * f_prime;
    // Validity term adds (2 lambda V gamma / k) sigma'(alpha_i) at the true label.
    const double vcoef = 2.0 * hp.lambda * eval.validity_gap;
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index y = train.labels[static_cast<std::size_t>(i)] - 1;
        weighted(i, y) += vcoef * slope(i, y);
    }
    const Eigen::MatrixXd grad_matrix =
        (hp.gamma / kd) * (train.features.transpose() * weighted.matrix());
    eval.gradient = Eigen::Map<const Eigen::VectorXd>(grad_matrix.data(), grad_matrix.size());
    return eval;
}

std::pair<double, Eigen::VectorXd> transform_loss(double loss, const Eigen::VectorXd& gradient,
                                                  Transform kind) {
    if (kind == Transform::identity) return {loss, gradient};
    if (!(loss > 0.0)) {
        throw std::invalid_argument("transform_loss: loss must be positive for the " +
                                    transform_name(kind) + " transform");
    }
    switch (kind) {
        case Transform::log:
            return {std::log(loss), gradient / loss};
        case Transform::neg_inverse:
            return {-1.0 / loss, gradient / (loss * loss)};
        case Transform::neg_inverse_square:
            return {-1.0 / (loss * loss), 2.0 * gradient / (loss * loss * loss)};
        case Transform::identity:
            break;
    }
    return {loss, gradient};
}

} // namespace scpo
