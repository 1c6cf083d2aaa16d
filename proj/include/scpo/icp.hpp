#pragma once

#include "scpo/conformity.hpp"
#include "scpo/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

namespace scpo {

/// Calibration conformity scores, kept both in arrival order and sorted
/// ascending for quantile and counting queries.
struct CalibrationScores {
    Eigen::VectorXd alphas;
    Eigen::VectorXd sorted_alphas;

    static CalibrationScores from_alphas(Eigen::VectorXd alphas);
    Eigen::Index size() const { return alphas.size(); }
};

/// Subset of the labels 1..C as a bit mask. Supports up to 64 labels, far
/// beyond the handful typical for prediction-set classification.
class PredictionSet {
public:
    PredictionSet() = default;
    explicit PredictionSet(int num_labels);

    void insert(int label);              // 1-based
    bool contains(int label) const;      // 1-based
    int size() const;
    int num_labels() const { return num_labels_; }
    bool full() const { return size() == num_labels_; }
    bool empty() const { return bits_ == 0; }

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

private:
    std::uint64_t bits_ = 0;
    int num_labels_ = 0;
};

/// A conformity scorer plus calibration scores and a significance level:
/// everything needed to emit prediction sets.
class IcpModel {
public:
    IcpModel(std::shared_ptr<const ConformityScorer> scorer, CalibrationScores calibration,
             double epsilon);

    const ConformityScorer& scorer() const { return *scorer_; }
    const CalibrationScores& calibration() const { return calibration_; }
    double epsilon() const { return epsilon_; }

private:
    std::shared_ptr<const ConformityScorer> scorer_;
    CalibrationScores calibration_;
    double epsilon_;
};

/// Score every example of `data` at its true label: alpha_i = A(x_i, y_i).
CalibrationScores calibrate(const ConformityScorer& scorer, const Dataset& data);

/// Label y is included iff
///   #{calibration alpha_i : score[y] >= alpha_i} + 1 > epsilon * (n_calib + 1).
/// The count uses the non-strict comparison, so ties with calibration scores
/// favour inclusion.
PredictionSet prediction_set(const IcpModel& model, const ScoreRow& scores);

/// Order statistic alpha_(j) with j = floor(epsilon * (n_calib + 1)) - 1,
/// 1-based. Returns -infinity when j < 1; with a strict score > q rule that
/// sentinel admits every label.
double calibration_quantile(const CalibrationScores& calib, double epsilon);

/// Fraction of examples whose true label is in its prediction set.
double coverage(const std::vector<PredictionSet>& sets, const std::vector<int>& labels);

} // namespace scpo
