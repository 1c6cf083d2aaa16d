#pragma once

#include "scpo/conformity.hpp"
#include "scpo/dataset.hpp"
#include "scpo/icp.hpp"

#include <Eigen/Dense>

#include <vector>

namespace scpo {

/// Multinomial logistic regression coefficients, m x C with the last class
/// column pinned to zero for identifiability.
struct ProbModel {
    Eigen::MatrixXd weights;
    int iterations = 0;
    double final_nll = 0.0;        // total negative log-likelihood at the fit
    std::vector<double> ll_trace;  // mean log-likelihood after each accepted step
};

/// Full-batch gradient ascent on the multinomial log-likelihood with
/// step-halving, so the likelihood never decreases. Stops when the gradient
/// max-norm drops to `tol` or after `max_iters` accepted steps.
ProbModel train_multinomial(const Dataset& train, int max_iters = 500, double tol = 1e-8);

/// scores[y-1] = estimated P(Y = y | x); positive, summing to 1.
ScoreRow prob_scores(const ProbModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

class ProbScorer final : public ConformityScorer {
public:
    explicit ProbScorer(ProbModel model) : model_(std::move(model)) {}

    Eigen::Index feature_count() const override { return model_.weights.rows(); }
    Eigen::Index class_count() const override { return model_.weights.cols(); }
    ScoreRow score_all(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
        return prob_scores(model_, x);
    }
    const ProbModel& model() const { return model_; }

private:
    ProbModel model_;
};

/// Wrap a trained probability model as an ICP: calibration scores are the
/// predicted probabilities of the true labels.
IcpModel baseline_icp(const ProbModel& model, const Dataset& calib, double epsilon);

} // namespace scpo
