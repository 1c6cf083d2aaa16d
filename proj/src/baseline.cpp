#include "scpo/baseline.hpp"

#include "scpo/errors.hpp"

#include <cmath>
#include <string>

namespace scpo {

namespace {

// Row-wise stable softmax of the logit matrix (k x C).
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::ArrayXXd shifted =
        (logits.array().colwise() - logits.rowwise().maxCoeff().array()).exp();
    return (shifted.colwise() / shifted.rowwise().sum()).matrix();
}

// Mean log-likelihood of the true labels under weights W.
double mean_log_likelihood(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                           const Eigen::MatrixXd& weights) {
    Eigen::MatrixXd logits = x * weights;
    Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    Eigen::VectorXd log_norm =
        (logits.array().colwise() - row_max.array()).exp().rowwise().sum().log().matrix() + row_max;
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        total += logits(i, labels[static_cast<std::size_t>(i)] - 1) - log_norm(i);
    }
    return total / static_cast<double>(x.rows());
}

} // namespace

ProbModel train_multinomial(const Dataset& train, int max_iters, double tol) {
    if (train.row_count() == 0) {
        throw DataError("cannot fit a probability model on an empty training set");
    }
    if (max_iters < 1) {
        throw std::invalid_argument("max_iters must be at least 1");
    }
    const Eigen::Index k = train.row_count();
    const Eigen::Index m = train.feature_count();
    const Eigen::Index c = train.class_count();

    std::vector<Eigen::Index> counts(static_cast<std::size_t>(c), 0);
    for (int y : train.labels) {
        ++counts[static_cast<std::size_t>(y - 1)];
    }
    for (Eigen::Index j = 0; j < c; ++j) {
        if (counts[static_cast<std::size_t>(j)] == 0) {
            throw DataError("class '" + train.label_names[static_cast<std::size_t>(j)] +
                            "' has no training examples; cannot fit class probabilities");
        }
    }

    // One-hot true-label matrix for the gradient: G = X^T (Y - P) / k.
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(k, c);
    for (Eigen::Index i = 0; i < k; ++i) {
        onehot(i, train.labels[static_cast<std::size_t>(i)] - 1) = 1.0;
    }

    ProbModel model;
    model.weights = Eigen::MatrixXd::Zero(m, c);
    double ll = mean_log_likelihood(train.features, train.labels, model.weights);
    model.ll_trace.push_back(ll);

    double step = 1.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        Eigen::MatrixXd probs = softmax_rows(train.features * model.weights);
        Eigen::MatrixXd grad =
            train.features.transpose() * (onehot - probs) / static_cast<double>(k);
        grad.col(c - 1).setZero(); // gauge: last class column stays pinned at zero

        if (grad.template lpNorm<Eigen::Infinity>() <= tol) {
            break;
        }

        // Halve the step until the likelihood stops getting worse.
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            Eigen::MatrixXd candidate = model.weights + step * grad;
            double candidate_ll = mean_log_likelihood(train.features, train.labels, candidate);
            if (std::isfinite(candidate_ll) && candidate_ll >= ll) {
                model.weights = std::move(candidate);
                ll = candidate_ll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break; // no ascent direction left at representable step sizes
        }
        model.ll_trace.push_back(ll);
        ++model.iterations;
        step = std::min(step * 2.0, 1e12); // let the step recover between iterations
    }

    model.final_nll = -ll * static_cast<double>(k);
    return model;
}

ScoreRow prob_scores(const ProbModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != model.weights.rows()) {
        throw std::invalid_argument("feature vector has " + std::to_string(x.size()) +
                                    " entries; model expects " +
                                    std::to_string(model.weights.rows()));
    }
    Eigen::VectorXd logits = model.weights.transpose() * x;
    Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
    return (shifted / shifted.sum()).matrix();
}

IcpModel baseline_icp(const ProbModel& model, const Dataset& calib, double epsilon) {
    auto scorer = std::make_shared<ProbScorer>(model);
    CalibrationScores calibration = calibrate(*scorer, calib);
    return IcpModel(std::move(scorer), std::move(calibration), epsilon);
}

} // namespace scpo
