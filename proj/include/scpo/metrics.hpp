#pragma once

#include "scpo/dataset.hpp"
#include "scpo/icp.hpp"

#include <string>
#include <vector>

namespace scpo {

/// Cost of a prediction set as a function of its size, with the derivative of
/// the real-valued extension (the soft set size is a real number).
struct InefficiencyMeasure {
    enum class Kind { identity, log1p };
    Kind kind = Kind::identity;

    double f(double w) const;
    double f_prime(double w) const;
    std::string name() const;

    static InefficiencyMeasure identity() { return {Kind::identity}; }
    static InefficiencyMeasure log_size() { return {Kind::log1p}; }
    static InefficiencyMeasure parse(const std::string& name);
};

/// Test-set summary for one ICP at one significance level.
struct EvalReport {
    double epsilon = 0.0;
    double accuracy = 0.0;
    double mean_ineff = 0.0;
    std::vector<Eigen::Index> set_size_histogram; // counts for sizes 0..C
    Eigen::Index n_test = 0;
};

struct BinomialComparison {
    Eigen::Index wins_a = 0; // examples where A's set is strictly smaller
    Eigen::Index wins_b = 0;
    double p_value = 0.0;    // NaN when every example ties
};

/// Mean f(|set|) over the given prediction sets.
double inefficiency(const std::vector<PredictionSet>& sets, const InefficiencyMeasure& measure);

/// Paired exact binomial sign test on set sizes: per example A wins if its
/// set is strictly smaller, ties are discarded, and wins are tested against
/// P(win) = 1/2 two-sided.
BinomialComparison binomial_compare(const std::vector<PredictionSet>& sets_a,
                                    const std::vector<PredictionSet>& sets_b);

/// Score every row of `test`, build its prediction set, and aggregate
/// accuracy, mean inefficiency, and the set-size histogram.
EvalReport evaluate_icp(const IcpModel& model, const Dataset& test,
                        const InefficiencyMeasure& measure);

/// 100 * (1 - scpo / baseline): positive when the first argument is better.
double change_in_inefficiency(double scpo, double baseline);

/// One CSV row: epsilon, accuracy, mean inefficiency, test size, histogram.
std::string eval_report_csv_header();
std::string eval_report_csv_row(const EvalReport& report);

} // namespace scpo
