#include "scpo/metrics.hpp"

#include "scpo/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace scpo {

namespace {

// P(X <= x) for X ~ Binomial(n, 1/2), via log-space terms. Accurate far past
// the sizes any paired test here produces.
double binomial_half_cdf(Eigen::Index x, Eigen::Index n) {
    if (x < 0) return 0.0;
    if (x >= n) return 1.0;
    const double log_half_n = -static_cast<double>(n) * std::log(2.0);
    double acc = 0.0;
    for (Eigen::Index i = 0; i <= x; ++i) {
        const double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                                std::lgamma(static_cast<double>(i) + 1.0) -
                                std::lgamma(static_cast<double>(n - i) + 1.0) + log_half_n;
        acc += std::exp(log_term);
    }
    return std::min(acc, 1.0);
}

} // namespace

double InefficiencyMeasure::f(double w) const {
    switch (kind) {
        case Kind::identity: return w;
        case Kind::log1p: return std::log1p(w);
    }
    return w;
}

double InefficiencyMeasure::f_prime(double w) const {
    switch (kind) {
        case Kind::identity: return 1.0;
        case Kind::log1p: return 1.0 / (w + 1.0);
    }
    return 1.0;
}

std::string InefficiencyMeasure::name() const {
    return kind == Kind::identity ? "identity" : "log";
}

InefficiencyMeasure InefficiencyMeasure::parse(const std::string& name) {
    if (name == "identity") return identity();
    if (name == "log") return log_size();
    throw std::invalid_argument("unknown inefficiency measure '" + name + "' (expected identity|log)");
}

double inefficiency(const std::vector<PredictionSet>& sets, const InefficiencyMeasure& measure) {
    if (sets.empty()) throw std::invalid_argument("inefficiency: empty set list");
    double acc = 0.0;
    for (const auto& s : sets) acc += measure.f(static_cast<double>(s.size()));
    return acc / static_cast<double>(sets.size());
}

BinomialComparison binomial_compare(const std::vector<PredictionSet>& sets_a,
                                    const std::vector<PredictionSet>& sets_b) {
    if (sets_a.size() != sets_b.size()) {
        throw std::invalid_argument("binomial_compare: " + std::to_string(sets_a.size()) + " vs " +
                                    std::to_string(sets_b.size()) + " paired sets");
    }
    BinomialComparison cmp;
    for (std::size_t i = 0; i < sets_a.size(); ++i) {
        const int sa = sets_a[i].size();
        const int sb = sets_b[i].size();
        if (sa < sb) ++cmp.wins_a;
        else if (sb < sa) ++cmp.wins_b;
    }
    const Eigen::Index n = cmp.wins_a + cmp.wins_b;
    if (n == 0) {
        cmp.p_value = std::numeric_limits<double>::quiet_NaN();
        return cmp;
    }
    // exact two-sided test: doubled smaller tail, capped at 1
    const double lower = binomial_half_cdf(cmp.wins_a, n);
    const double upper = 1.0 - binomial_half_cdf(cmp.wins_a - 1, n);
    cmp.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    return cmp;
}

EvalReport evaluate_icp(const IcpModel& model, const Dataset& test,
                        const InefficiencyMeasure& measure) {
    if (test.row_count() == 0) throw DataError("evaluate_icp: empty test set");
    if (test.feature_count() != model.scorer().feature_count()) {
        throw DataError("evaluate_icp: dataset has " + std::to_string(test.feature_count()) +
                        " features, scorer expects " + std::to_string(model.scorer().feature_count()));
    }
    const auto c = static_cast<int>(model.scorer().class_count());

    std::vector<PredictionSet> sets;
    sets.reserve(static_cast<std::size_t>(test.row_count()));
    for (Eigen::Index i = 0; i < test.row_count(); ++i) {
        sets.push_back(prediction_set(model, model.scorer().score_all(test.features.row(i).transpose())));
    }

    EvalReport report;
    report.epsilon = model.epsilon();
    report.n_test = test.row_count();
    report.accuracy = coverage(sets, test.labels);
    report.mean_ineff = inefficiency(sets, measure);
    report.set_size_histogram.assign(static_cast<std::size_t>(c) + 1, 0);
    for (const auto& s : sets) ++report.set_size_histogram[static_cast<std::size_t>(s.size())];
    return report;
}

double change_in_inefficiency(double scpo, double baseline) {
    if (!(baseline > 0.0)) {
        throw std::invalid_argument("change_in_inefficiency: baseline inefficiency must be positive");
    }
    return 100.0 * (1.0 - scpo / baseline);
}

std::string eval_report_csv_header() {
    return "epsilon,accuracy,mean_ineff,n_test,size_histogram";
}

std::string eval_report_csv_row(const EvalReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%lld", report.epsilon, report.accuracy,
                  report.mean_ineff, static_cast<long long>(report.n_test));
    std::string row(buf);
    row += ',';
    for (std::size_t i = 0; i < report.set_size_histogram.size(); ++i) {
        if (i) row += '|';
        row += std::to_string(report.set_size_histogram[i]);
    }
    return row;
}

} // namespace scpo
