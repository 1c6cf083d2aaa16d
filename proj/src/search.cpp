#include "scpo/search.hpp"

#include "scpo/errors.hpp"
#include "scpo/icp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace scpo {

namespace {

constexpr int kStopWindow = 10;

bool window_converged(const std::vector<double>& trace, double rel_tol) {
    if (trace.size() <= kStopWindow) {
        return false;
    }
    double now = trace.back();
    double then = trace[trace.size() - 1 - kStopWindow];
    double scale = std::max({std::abs(now), std::abs(then), 1e-12});
    return std::abs(now - then) <= rel_tol * scale;
}

} // namespace

GradientDescentResult gradient_descent(const Dataset& train, const Hyperparams& hp,
                                       const InefficiencyMeasure& ineff) {
    hp.validate();
    GradientDescentResult result;
    result.theta.entries = Eigen::MatrixXd::Zero(train.feature_count(), train.class_count());

    ThetaMatrix theta = result.theta;
    for (int step = 0; step <= hp.max_iters; ++step) {
        double transformed = 0.0;
        Eigen::VectorXd transformed_grad;
        try {
            SurrogateEval eval = evaluate(theta, train, hp, ineff);
            std::tie(transformed, transformed_grad) =
                transform_loss(eval.loss, eval.gradient, hp.transform);
        } catch (const std::invalid_argument&) {
            result.diverged = true; // loss left the transform's domain
            return result;
        }
        if (!std::isfinite(transformed) || !transformed_grad.allFinite()) {
            result.diverged = true;
            return result;
        }

        result.theta = theta; // latest iterate with a finite loss
        result.trace.push_back(transformed);
        if (window_converged(result.trace, hp.rel_tol) || step == hp.max_iters) {
            break;
        }

        Eigen::VectorXd flat = theta.flatten() - hp.eta * transformed_grad;
        if (!flat.allFinite()) {
            result.diverged = true;
            return result;
        }
        theta = ThetaMatrix::unflatten(flat, train.feature_count(), train.class_count());
    }
    return result;
}

TrainingIcpScore training_icp_score(const ThetaMatrix& theta, const Dataset& train,
                                    double epsilon, const InefficiencyMeasure& ineff) {
    auto scorer = std::make_shared<LinearScorer>(theta);
    IcpModel model(scorer, calibrate(*scorer, train), epsilon);
    std::vector<PredictionSet> sets;
    sets.reserve(static_cast<std::size_t>(train.row_count()));
    for (Eigen::Index i = 0; i < train.row_count(); ++i) {
        sets.push_back(prediction_set(model, scorer->score_all(train.features.row(i))));
    }
    TrainingIcpScore score;
    score.ineff = inefficiency(sets, ineff);
    score.accuracy = coverage(sets, train.labels);
    return score;
}

GridSpec GridSpec::defaults(double epsilon, InefficiencyMeasure ineff, Transform transform) {
    GridSpec grid;
    grid.lambdas = {10, 100, 500, 1000, 5000, 10000};
    grid.gammas = {1, 2, 5, 10};
    grid.etas = {1, 10, 100, 1000};
    grid.transform = transform;
    grid.epsilon = epsilon;
    grid.ineff = std::move(ineff);
    return grid;
}

Hyperparams GridSpec::cell(std::size_t index) const {
    if (index >= cell_count()) {
        throw std::out_of_range("grid cell index out of range");
    }
    Hyperparams hp;
    hp.eta = etas[index % etas.size()];
    index /= etas.size();
    hp.gamma = gammas[index % gammas.size()];
    hp.lambda = lambdas[index / gammas.size()];
    hp.epsilon = epsilon;
    hp.transform = transform;
    hp.max_iters = max_iters;
    hp.rel_tol = rel_tol;
    return hp;
}

GridSearchResult grid_search(const Dataset& train, const GridSpec& grid, int jobs) {
    if (grid.lambdas.empty() || grid.gammas.empty() || grid.etas.empty()) {
        throw std::invalid_argument("grid must have at least one value per hyperparameter");
    }
    if (jobs < 1) {
        throw std::invalid_argument("jobs must be at least 1");
    }

    const std::size_t n = grid.cell_count();
    GridSearchResult result;
    result.cells.resize(n);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t index = next.fetch_add(1);
            if (index >= n) {
                return;
            }
            TrainedCandidate cell;
            cell.hp = grid.cell(index);
            GradientDescentResult fit = gradient_descent(train, cell.hp, grid.ineff);
            cell.theta = std::move(fit.theta);
            cell.diverged = fit.diverged;
            if (fit.diverged) {
                cell.final_loss = std::numeric_limits<double>::quiet_NaN();
                cell.train_ineff = std::numeric_limits<double>::quiet_NaN();
                cell.train_accuracy = std::numeric_limits<double>::quiet_NaN();
            } else {
                cell.final_loss = fit.trace.back();
                TrainingIcpScore score =
                    training_icp_score(cell.theta, train, grid.epsilon, grid.ineff);
                cell.train_ineff = score.ineff;
                cell.train_accuracy = score.accuracy;
            }
            result.cells[index] = std::move(cell);
        }
    };

    int thread_count = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) {
            threads.emplace_back(worker);
        }
        for (auto& thread : threads) {
            thread.join();
        }
    }

    // Sequential selection after the parallel fits, so the winner does not
    // depend on thread scheduling: smallest inefficiency, then smallest
    // lambda, gamma, eta.
    const TrainedCandidate* best = nullptr;
    for (const TrainedCandidate& cell : result.cells) {
        if (cell.diverged || !std::isfinite(cell.train_ineff)) {
            continue;
        }
        if (best == nullptr ||
            std::tie(cell.train_ineff, cell.hp.lambda, cell.hp.gamma, cell.hp.eta) <
                std::tie(best->train_ineff, best->hp.lambda, best->hp.gamma, best->hp.eta)) {
            best = &cell;
        }
    }
    if (best == nullptr) {
        throw NumericalError("every grid cell diverged; no usable candidate");
    }
    result.best = *best;
    return result;
}

std::string grid_csv_header() {
    return "lambda,gamma,eta,transform,final_loss,train_ineff,train_acc,diverged";
}

namespace {

std::string csv_number(double value) {
    if (!std::isfinite(value)) {
        return "NA";
    }
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

} // namespace

std::string grid_csv_row(const TrainedCandidate& cell) {
    std::string row;
    row += csv_number(cell.hp.lambda);
    row += ',';
    row += csv_number(cell.hp.gamma);
    row += ',';
    row += csv_number(cell.hp.eta);
    row += ',';
    row += transform_name(cell.hp.transform);
    row += ',';
    row += csv_number(cell.final_loss);
    row += ',';
    row += csv_number(cell.train_ineff);
    row += ',';
    row += csv_number(cell.train_accuracy);
    row += ',';
    row += cell.diverged ? "1" : "0";
    return row;
}

} // namespace scpo
