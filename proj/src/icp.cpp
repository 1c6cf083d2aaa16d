#include "scpo/icp.hpp"

#include "scpo/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace scpo {

CalibrationScores CalibrationScores::from_alphas(Eigen::VectorXd alphas) {
    CalibrationScores calib;
    calib.sorted_alphas = alphas;
    std::sort(calib.sorted_alphas.begin(), calib.sorted_alphas.end());
    calib.alphas = std::move(alphas);
    return calib;
}

PredictionSet::PredictionSet(int num_labels) : num_labels_(num_labels) {
    if (num_labels < 1 || num_labels > 64) {
        throw std::invalid_argument("PredictionSet supports 1..64 labels, got " +
                                    std::to_string(num_labels));
    }
}

void PredictionSet::insert(int label) {
    if (label < 1 || label > num_labels_) {
        throw std::invalid_argument("PredictionSet::insert: label " + std::to_string(label) +
                                    " out of range 1.." + std::to_string(num_labels_));
    }
    bits_ |= std::uint64_t{1} << (label - 1);
}

bool PredictionSet::contains(int label) const {
    if (label < 1 || label > num_labels_) return false;
    return (bits_ >> (label - 1)) & 1u;
}

int PredictionSet::size() const {
    return static_cast<int>(std::popcount(bits_));
}

IcpModel::IcpModel(std::shared_ptr<const ConformityScorer> scorer, CalibrationScores calibration,
                   double epsilon)
    : scorer_(std::move(scorer)), calibration_(std::move(calibration)), epsilon_(epsilon) {
    if (!scorer_) throw std::invalid_argument("IcpModel: null scorer");
    if (calibration_.size() == 0) throw std::invalid_argument("IcpModel: empty calibration");
    if (!(epsilon_ > 0.0 && epsilon_ < 1.0)) {
        throw std::invalid_argument("IcpModel: epsilon must lie in (0,1)");
    }
}

CalibrationScores calibrate(const ConformityScorer& scorer, const Dataset& data) {
    if (data.row_count() == 0) throw DataError("calibrate: empty calibration data");
    if (data.feature_count() != scorer.feature_count()) {
        throw DataError("calibrate: dataset has " + std::to_string(data.feature_count()) +
                        " features, scorer expects " + std::to_string(scorer.feature_count()));
    }
    Eigen::VectorXd alphas(data.row_count());
    for (Eigen::Index i = 0; i < data.row_count(); ++i) {
        const ScoreRow row = scorer.score_all(data.features.row(i).transpose());
        alphas(i) = row(data.labels[static_cast<std::size_t>(i)] - 1);
    }
    return CalibrationScores::from_alphas(std::move(alphas));
}

PredictionSet prediction_set(const IcpModel& model, const ScoreRow& scores) {
    const Eigen::Index c = model.scorer().class_count();
    if (scores.size() != c) {
        throw std::invalid_argument("prediction_set: score row has " + std::to_string(scores.size()) +
                                    " entries, expected " + std::to_string(c));
    }
    const auto& sorted = model.calibration().sorted_alphas;
    const double threshold = model.epsilon() * static_cast<double>(sorted.size() + 1);

    PredictionSet set(static_cast<int>(c));
    for (int y = 1; y <= c; ++y) {
        const double s = scores(y - 1);
        // number of calibration alphas <= s, i.e. with s >= alpha
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin();
        if (static_cast<double>(count + 1) > threshold) set.insert(y);
    }
    return set;
}

double calibration_quantile(const CalibrationScores& calib, double epsilon) {
    if (calib.size() == 0) throw std::invalid_argument("calibration_quantile: empty calibration");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("calibration_quantile: epsilon must lie in (0,1)");
    }
    const auto j = static_cast<Eigen::Index>(
        std::floor(epsilon * static_cast<double>(calib.size() + 1))) - 1;
    if (j < 1) return -std::numeric_limits<double>::infinity();
    return calib.sorted_alphas(j - 1);
}

double coverage(const std::vector<PredictionSet>& sets, const std::vector<int>& labels) {
    if (sets.size() != labels.size()) {
        throw std::invalid_argument("coverage: " + std::to_string(sets.size()) + " sets vs " +
                                    std::to_string(labels.size()) + " labels");
    }
    if (sets.empty()) throw std::invalid_argument("coverage: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].contains(labels[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(sets.size());
}

} // namespace scpo
