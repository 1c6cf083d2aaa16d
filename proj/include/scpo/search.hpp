#pragma once

#include "scpo/conformity.hpp"
#include "scpo/dataset.hpp"
#include "scpo/metrics.hpp"
#include "scpo/surrogate.hpp"

#include <string>
#include <vector>

namespace scpo {

/// One gradient-descent fit of the surrogate loss.
struct GradientDescentResult {
    ThetaMatrix theta;          // last finite iterate
    std::vector<double> trace;  // transformed loss at each visited iterate
    bool diverged = false;      // hit a non-finite loss or gradient
};

/// Minimize the transformed surrogate loss from a zero start. Stops after
/// `hp.max_iters` update steps, or earlier once the transformed loss moves by
/// less than `hp.rel_tol` (relative) across a 10-step window. A non-finite
/// loss or gradient marks the result diverged instead of throwing.
GradientDescentResult gradient_descent(const Dataset& train, const Hyperparams& hp,
                                       const InefficiencyMeasure& ineff);

/// Prediction-set quality of a parameter matrix measured on the training set
/// itself (used both as calibration and evaluation). This deliberately breaks
/// exchangeability; it is a model-selection score, not a validity estimate.
struct TrainingIcpScore {
    double ineff = 0.0;
    double accuracy = 0.0;  // fraction of rows whose set contains the true label
};

TrainingIcpScore training_icp_score(const ThetaMatrix& theta, const Dataset& train,
                                    double epsilon, const InefficiencyMeasure& ineff);

/// Hyperparameter grid over (lambda, gamma, eta) with a shared transform,
/// significance level, and efficiency criterion.
struct GridSpec {
    std::vector<double> lambdas;
    std::vector<double> gammas;
    std::vector<double> etas;
    Transform transform = Transform::neg_inverse;
    double epsilon = 0.05;
    InefficiencyMeasure ineff = InefficiencyMeasure::identity();
    int max_iters = 2000;
    double rel_tol = 1e-7;

    static GridSpec defaults(double epsilon, InefficiencyMeasure ineff,
                             Transform transform = Transform::neg_inverse);

    std::size_t cell_count() const {
        return lambdas.size() * gammas.size() * etas.size();
    }
    /// Hyperparameters of cell `index` in lambda-major, then gamma, then eta
    /// order. The flat index is the canonical cell identity everywhere.
    Hyperparams cell(std::size_t index) const;
};

/// One fitted grid cell with its selection scores.
struct TrainedCandidate {
    Hyperparams hp;
    ThetaMatrix theta;
    double final_loss = 0.0;      // transformed loss at the returned iterate
    double train_ineff = 0.0;     // NaN when diverged
    double train_accuracy = 0.0;  // NaN when diverged
    bool diverged = false;
};

struct GridSearchResult {
    TrainedCandidate best;
    std::vector<TrainedCandidate> cells;  // in GridSpec::cell order
};

/// Fit every cell and pick the non-diverged candidate with the smallest
/// training-set inefficiency, breaking ties by smaller lambda, then gamma,
/// then eta. `jobs` worker threads share the cells; the winner and the cell
/// order are identical regardless of thread count. Throws NumericalError if
/// every cell diverged.
GridSearchResult grid_search(const Dataset& train, const GridSpec& grid, int jobs = 1);

/// CSV export of the per-cell results (non-finite numbers print as NA).
std::string grid_csv_header();
std::string grid_csv_row(const TrainedCandidate& cell);

} // namespace scpo
