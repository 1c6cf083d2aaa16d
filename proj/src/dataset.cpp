#include "scpo/dataset.hpp"

#include "scpo/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace scpo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool is_missing_marker(const std::string& cell) {
    return cell.empty() || cell == "NA";
}

double parse_number(const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && cell.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw DataError("non-numeric value '" + cell + "' in column '" + col +
                        "' at data row " + std::to_string(row + 1));
    }
    return v;
}

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), data.feature_count());
    out.labels.reserve(rows.size());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(rows.size()); ++i) {
        out.features.row(i) = data.features.row(rows[i]);
        out.labels.push_back(data.labels[static_cast<std::size_t>(rows[i])]);
    }
    out.label_names = data.label_names;
    out.feature_names = data.feature_names;
    out.has_intercept = data.has_intercept;
    return out;
}

// Unbiased draw in [0, n) from the raw 64-bit stream, so the permutation does
// not depend on the standard library's distribution implementation.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

} // namespace

bool Dataset::has_missing() const {
    return features.hasNaN();
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return j;
    }
    return header.size();
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);

    CsvTable table;
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw DataError("row " + std::to_string(table.rows.size() + 1) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

Eigen::VectorXd numeric_column(const CsvTable& table, std::size_t column) {
    if (column >= table.header.size()) {
        throw DataError("numeric_column: column index out of range");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string& cell = table.rows[i][column];
        out(static_cast<Eigen::Index>(i)) =
            is_missing_marker(cell) ? kNaN : parse_number(cell, i, table.header[column]);
    }
    return out;
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
    const CsvTable table = read_csv_table(path);
    const std::size_t label_idx = table.column_index(label_column);
    if (label_idx == table.header.size()) {
        throw DataError("label column '" + label_column + "' not found in header of " + path);
    }
    if (table.rows.empty()) throw DataError("no data rows in " + path);

    Dataset data;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j != label_idx) data.feature_names.push_back(table.header[j]);
    }

    std::vector<std::string> raw_labels;
    raw_labels.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (is_missing_marker(table.rows[i][label_idx])) {
            throw DataError("missing label value at data row " + std::to_string(i + 1));
        }
        raw_labels.push_back(table.rows[i][label_idx]);
    }

    // lexicographic encoding of distinct label strings -> 1..C
    std::map<std::string, int> encoding;
    for (const auto& s : raw_labels) encoding.emplace(s, 0);
    if (encoding.size() < 2) throw DataError("fewer than 2 classes in label column '" + label_column + "'");
    int next = 1;
    for (auto& [name, code] : encoding) {
        code = next++;
        data.label_names.push_back(name);
    }

    data.features.resize(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(data.feature_names.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        Eigen::Index out_j = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (j == label_idx) continue;
            const std::string& cell = table.rows[i][j];
            data.features(static_cast<Eigen::Index>(i), out_j++) =
                is_missing_marker(cell) ? kNaN : parse_number(cell, i, table.header[j]);
        }
    }
    data.labels.reserve(raw_labels.size());
    for (const auto& s : raw_labels) data.labels.push_back(encoding.at(s));
    return data;
}

ImputeResult impute_means(const Dataset& train, const std::vector<Dataset>& others) {
    for (const auto& d : others) {
        if (d.feature_count() != train.feature_count()) {
            throw DataError("impute_means: feature count mismatch between datasets");
        }
    }

    ImputeResult result;
    result.dropped_rows.assign(others.size() + 1, 0);

    auto drop_all_missing = [](const Dataset& d, Eigen::Index& dropped) {
        std::vector<Eigen::Index> keep;
        keep.reserve(d.row_count());
        for (Eigen::Index i = 0; i < d.row_count(); ++i) {
            if (d.feature_count() > 0 && d.features.row(i).array().isNaN().all()) continue;
            keep.push_back(i);
        }
        dropped = d.row_count() - static_cast<Eigen::Index>(keep.size());
        return take_rows(d, keep);
    };

    result.train = drop_all_missing(train, result.dropped_rows[0]);
    for (std::size_t i = 0; i < others.size(); ++i) {
        result.others.push_back(drop_all_missing(others[i], result.dropped_rows[i + 1]));
    }

    const Eigen::Index m = result.train.feature_count();
    Eigen::VectorXd col_mean(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double sum = 0.0;
        Eigen::Index observed = 0;
        for (Eigen::Index i = 0; i < result.train.row_count(); ++i) {
            const double v = result.train.features(i, j);
            if (!std::isnan(v)) {
                sum += v;
                ++observed;
            }
        }
        if (observed == 0) {
            throw DataError("impute_means: column '" + result.train.feature_names[static_cast<std::size_t>(j)] +
                            "' has no observed values in the training data");
        }
        col_mean(j) = sum / static_cast<double>(observed);
    }

    auto fill = [&](Dataset& d) {
        for (Eigen::Index i = 0; i < d.row_count(); ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                if (std::isnan(d.features(i, j))) d.features(i, j) = col_mean(j);
            }
        }
    };
    fill(result.train);
    for (auto& d : result.others) fill(d);
    return result;
}

SplitResult split(const Dataset& data, const SplitSpec& spec) {
    const Eigen::Index k = data.row_count();
    if (spec.train_count + spec.calib_count + spec.test_count != k) {
        throw DataError("split: counts sum to " +
                        std::to_string(spec.train_count + spec.calib_count + spec.test_count) +
                        " but dataset has " + std::to_string(k) + " rows");
    }
    if (spec.train_count < 1) throw DataError("split: train_count must be >= 1");
    if (spec.calib_count < 1) throw DataError("split: calib_count must be >= 1 for ICP use");
    if (spec.test_count < 0) throw DataError("split: test_count must be >= 0");

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;

    // Fisher-Yates with an explicit bounded draw; std::shuffle is
    // implementation-defined and would break the determinism contract.
    std::mt19937_64 rng(spec.seed);
    for (Eigen::Index i = k - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(bounded_draw(rng, static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }

    SplitResult out;
    const auto first = idx.begin();
    out.train = take_rows(data, {first, first + spec.train_count});
    out.calib = take_rows(data, {first + spec.train_count, first + spec.train_count + spec.calib_count});
    out.test = take_rows(data, {first + spec.train_count + spec.calib_count, idx.end()});
    return out;
}

Normalizer fit_normalizer(const Dataset& train) {
    const Eigen::Index k = train.row_count();
    const Eigen::Index m = train.feature_count();
    if (k == 0) throw DataError("fit_normalizer: empty dataset");
    if (train.has_missing()) throw DataError("fit_normalizer: dataset still has missing values");

    Normalizer norm;
    norm.means.resize(m);
    norm.stds.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        if (train.has_intercept && j == m - 1) {
            norm.means(j) = 0.0;
            norm.stds(j) = 1.0;
            continue;
        }
        const double mean = train.features.col(j).mean();
        double ss = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) {
            const double d = train.features(i, j) - mean;
            ss += d * d;
        }
        const double var = (k > 1) ? ss / static_cast<double>(k - 1) : 0.0;
        norm.means(j) = mean;
        norm.stds(j) = std::sqrt(var);
    }
    return norm;
}

Dataset apply_normalizer(const Normalizer& norm, const Dataset& data) {
    if (norm.means.size() != data.feature_count()) {
        throw DataError("apply_normalizer: normalizer has " + std::to_string(norm.means.size()) +
                        " columns, dataset has " + std::to_string(data.feature_count()));
    }
    Dataset out = data;
    for (Eigen::Index j = 0; j < out.feature_count(); ++j) {
        out.features.col(j).array() -= norm.means(j);
        if (norm.stds(j) > 0.0) out.features.col(j).array() /= norm.stds(j);
    }
    return out;
}

Dataset add_intercept(const Dataset& data) {
    if (data.has_intercept) throw DataError("add_intercept: intercept column already present");
    Dataset out = data;
    out.features.conservativeResize(Eigen::NoChange, data.feature_count() + 1);
    out.features.col(data.feature_count()).setOnes();
    out.feature_names.push_back("intercept");
    out.has_intercept = true;
    return out;
}

} // namespace scpo
