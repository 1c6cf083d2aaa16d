#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace scpo {

/// Tabular classification data in numeric form.
///
/// Rows are examples, columns are features. Labels are integer-encoded
/// 1..C in lexicographic order of the original label strings, so the same
/// file always loads to the same encoding. A missing feature cell is held
/// as NaN until impute_means() runs; afterwards every entry is finite.
struct Dataset {
    Eigen::MatrixXd features;               // k x m
    std::vector<int> labels;                // values in 1..C
    std::vector<std::string> label_names;   // size C; index y-1 is the original string
    std::vector<std::string> feature_names; // size m
    bool has_intercept = false;             // last column identically 1 when set

    Eigen::Index row_count() const { return features.rows(); }
    Eigen::Index feature_count() const { return features.cols(); }
    int class_count() const { return static_cast<int>(label_names.size()); }
    bool has_missing() const;
};

/// Per-column shift/scale fitted on training data only.
/// stds entry 0 flags a constant column, applied shift-only.
struct Normalizer {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;
};

struct SplitSpec {
    Eigen::Index train_count = 0;
    Eigen::Index calib_count = 0;
    Eigen::Index test_count = 0;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset train;
    Dataset calib;
    Dataset test;
};

struct ImputeResult {
    Dataset train;
    std::vector<Dataset> others;
    // rows whose feature cells were all missing, dropped before imputation;
    // index 0 is train, the rest follow `others` order
    std::vector<Eigen::Index> dropped_rows;
};

/// Raw CSV contents: header plus trimmed string cells, before any numeric
/// interpretation. Lets callers assemble columns against a stored schema.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named header column, or header.size() when absent.
    std::size_t column_index(const std::string& name) const;
};

/// Read a CSV file with a header row; every data row must match its width.
CsvTable read_csv_table(const std::string& path);

/// Parse one column to numbers; an empty cell or the literal "NA" becomes
/// NaN. Anything else non-numeric is a DataError naming the cell.
Eigen::VectorXd numeric_column(const CsvTable& table, std::size_t column);

/// Parse a CSV with a header row. Feature columns must be numeric; an empty
/// cell or the literal "NA" is recorded as missing (NaN). The label column is
/// mapped to 1..C by lexicographic order of its distinct values.
Dataset load_csv(const std::string& path, const std::string& label_column);

/// Replace missing cells in `train` and every dataset in `others` by the
/// train-column mean of observed values. Rows with every feature missing are
/// dropped first and counted in the result.
ImputeResult impute_means(const Dataset& train, const std::vector<Dataset>& others);

/// Deterministic seeded partition into train/calib/test by uniform random
/// permutation. Counts must sum to the row count; train and calib need at
/// least one row each.
SplitResult split(const Dataset& data, const SplitSpec& spec);

/// Column means and sample (k-1 denominator) standard deviations over the
/// training data. An intercept column is stored as identity (mean 0, std 1).
Normalizer fit_normalizer(const Dataset& train);

/// x' = (x - mean) / std per column; shift-only where std is 0.
Dataset apply_normalizer(const Normalizer& norm, const Dataset& data);

/// Append a constant-1 column named "intercept".
Dataset add_intercept(const Dataset& data);

} // namespace scpo
