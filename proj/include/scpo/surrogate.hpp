#pragma once

#include "scpo/conformity.hpp"
#include "scpo/dataset.hpp"
#include "scpo/metrics.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace scpo {

/// Monotone transforms applied to the loss before gradient descent. All of
/// them keep the minimizer; they differ in how they flatten extreme values.
enum class Transform { identity, log, neg_inverse, neg_inverse_square };

Transform parse_transform(const std::string& name);
std::string transform_name(Transform kind);

/// One training configuration for the surrogate optimizer.
struct Hyperparams {
    double epsilon = 0.05;   // significance level, in (0,1)
    double lambda = 100.0;   // validity penalty weight, > 0
    double gamma = 2.0;      // sigmoid sharpness, > 0
    double eta = 10.0;       // learning rate, >= 0 (0 is the degenerate no-move case)
    Transform transform = Transform::neg_inverse;
    double q = 1.0;          // score threshold; held constant, never estimated
    int max_iters = 2000;
    double rel_tol = 1e-7;

    void validate() const;
};

/// One evaluation of the surrogate loss at a parameter point.
struct SurrogateEval {
    double loss = 0.0;            // untransformed L
    Eigen::VectorXd soft_sizes;   // s_i per training example, each in (0, C)
    double validity_gap = 0.0;    // V = soft coverage - (1 - epsilon)
    Eigen::VectorXd gradient;     // dL/dtheta, flat length p
};

/// Numerically stable 1 / (1 + exp(-gamma * a)); increasing in `a`, tends to
/// the indicator of a > 0 as gamma grows, never overflows.
double sigmoid(double a, double gamma);

/// Loss, soft sizes, validity gap, and the exact flat gradient for the linear
/// conformity measure on the given training data:
///   s_i = sum_y sigmoid(gamma * (A(x_i, y) - q))
///   V   = mean_i sigmoid(gamma * (alpha_i - q)) - (1 - epsilon)
///   L   = mean_i f(s_i) + lambda * V^2
SurrogateEval evaluate(const ThetaMatrix& theta, const Dataset& train, const Hyperparams& hp,
                       const InefficiencyMeasure& ineff);

/// Apply a loss transform to (L, dL): identity keeps both; log gives
/// (log L, dL/L); neg_inverse gives (-1/L, dL/L^2); neg_inverse_square gives
/// (-1/L^2, 2 dL/L^3). Non-identity kinds require L > 0.
std::pair<double, Eigen::VectorXd> transform_loss(double loss, const Eigen::VectorXd& gradient,
                                                  Transform kind);

} // namespace scpo
