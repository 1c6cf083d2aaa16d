#include "scpo/model_io.hpp"

#include "scpo/errors.hpp"
#include "scpo/metrics.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>

namespace scpo {

using nlohmann::json;

std::string model_kind_name(ModelKind kind) {
    return kind == ModelKind::scpo_linear ? "scpo_linear" : "multinomial";
}

namespace {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "scpo_linear") return ModelKind::scpo_linear;
    if (name == "multinomial") return ModelKind::multinomial;
    throw DataError("unknown model kind '" + name + "'");
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw DataError("model weights must be a non-empty array");
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
            throw DataError("model weights rows have inconsistent lengths");
        }
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    if (!arr.is_array()) throw DataError("expected a numeric array in model file");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
}

} // namespace

void save_model(const ModelFile& model, const std::string& path) {
    if (!model.weights.allFinite()) {
        throw NumericalError("model has non-finite weights; refusing to save");
    }
    json doc;
    doc["schema_version"] = model.schema_version;
    doc["kind"] = model_kind_name(model.kind);
    doc["weights"] = matrix_to_json(model.weights);
    doc["feature_names"] = model.feature_names;
    doc["label_column"] = model.label_column;
    doc["label_names"] = model.label_names;
    doc["has_intercept"] = model.has_intercept;
    doc["normalizer"] = {{"means", vector_to_json(model.normalizer.means)},
                         {"stds", vector_to_json(model.normalizer.stds)}};
    if (model.hyperparams) {
        const Hyperparams& hp = *model.hyperparams;
        doc["hyperparams"] = {{"epsilon", hp.epsilon},   {"lambda", hp.lambda},
                              {"gamma", hp.gamma},       {"eta", hp.eta},
                              {"transform", transform_name(hp.transform)},
                              {"q", hp.q},               {"max_iters", hp.max_iters},
                              {"rel_tol", hp.rel_tol}};
    }
    if (model.ineff_name) doc["ineff"] = *model.ineff_name;
    if (model.calibration_alphas) {
        if (!model.calibration_alphas->allFinite()) {
            throw NumericalError("calibration scores are non-finite; refusing to save");
        }
        doc["calibration_alphas"] = vector_to_json(*model.calibration_alphas);
    }

    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw DataError("failed while writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("model file " + path + " is not valid JSON: " + e.what());
    }

    try {
        ModelFile model;
        model.schema_version = doc.at("schema_version").get<int>();
        if (model.schema_version != 1) {
            throw DataError("unsupported model schema_version " +
                            std::to_string(model.schema_version));
        }
        model.kind = parse_model_kind(doc.at("kind").get<std::string>());
        model.weights = matrix_from_json(doc.at("weights"));
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        model.label_column = doc.at("label_column").get<std::string>();
        model.label_names = doc.at("label_names").get<std::vector<std::string>>();
        model.has_intercept = doc.at("has_intercept").get<bool>();
        model.normalizer.means = vector_from_json(doc.at("normalizer").at("means"));
        model.normalizer.stds = vector_from_json(doc.at("normalizer").at("stds"));
        if (doc.contains("hyperparams")) {
            const json& hj = doc.at("hyperparams");
            Hyperparams hp;
            hp.epsilon = hj.at("epsilon").get<double>();
            hp.lambda = hj.at("lambda").get<double>();
            hp.gamma = hj.at("gamma").get<double>();
            hp.eta = hj.at("eta").get<double>();
            hp.transform = parse_transform(hj.at("transform").get<std::string>());
            hp.q = hj.at("q").get<double>();
            hp.max_iters = hj.at("max_iters").get<int>();
            hp.rel_tol = hj.at("rel_tol").get<double>();
            model.hyperparams = hp;
        }
        if (doc.contains("ineff")) {
            model.ineff_name = doc.at("ineff").get<std::string>();
            InefficiencyMeasure::parse(*model.ineff_name); // validate early
        }
        if (doc.contains("calibration_alphas")) {
            model.calibration_alphas = vector_from_json(doc.at("calibration_alphas"));
        }

        const Eigen::Index raw = static_cast<Eigen::Index>(model.feature_names.size());
        const Eigen::Index expected_rows = raw + (model.has_intercept ? 1 : 0);
        if (model.weights.rows() != expected_rows) {
            throw DataError("model weights have " + std::to_string(model.weights.rows()) +
                            " rows but the schema implies " + std::to_string(expected_rows));
        }
        if (model.weights.cols() != static_cast<Eigen::Index>(model.label_names.size()) ||
            model.label_names.size() < 2) {
            throw DataError("model weight columns do not match the label vocabulary");
        }
        if (model.normalizer.means.size() != raw || model.normalizer.stds.size() != raw) {
            throw DataError("model normalizer does not match the feature schema");
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError("model file " + path + " is missing or mistypes a field: " + e.what());
    }
}

Dataset dataset_for_model(const ModelFile& model, const std::string& csv_path,
                          bool require_labels) {
    const CsvTable table = read_csv_table(csv_path);
    if (table.rows.empty()) throw DataError("no data rows in " + csv_path);

    const Eigen::Index k = static_cast<Eigen::Index>(table.rows.size());
    const Eigen::Index raw = static_cast<Eigen::Index>(model.feature_names.size());

    Dataset data;
    data.feature_names = model.feature_names;
    data.label_names = model.label_names;
    data.features.resize(k, raw);
    for (Eigen::Index j = 0; j < raw; ++j) {
        const std::string& name = model.feature_names[static_cast<std::size_t>(j)];
        const std::size_t col = table.column_index(name);
        if (col == table.header.size()) {
            throw DataError("column '" + name + "' required by the model is missing from " +
                            csv_path);
        }
        data.features.col(j) = numeric_column(table, col);
    }

    // A missing cell takes the training-column mean stored in the normalizer.
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < raw; ++j) {
            if (std::isnan(data.features(i, j))) data.features(i, j) = model.normalizer.means(j);
        }
    }

    if (require_labels) {
        const std::size_t label_col = table.column_index(model.label_column);
        if (label_col == table.header.size()) {
            throw DataError("label column '" + model.label_column + "' is missing from " +
                            csv_path);
        }
        std::map<std::string, int> vocab;
        for (std::size_t y = 0; y < model.label_names.size(); ++y) {
            vocab.emplace(model.label_names[y], static_cast<int>(y) + 1);
        }
        data.labels.reserve(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const std::string& cell = table.rows[i][label_col];
            auto it = vocab.find(cell);
            if (it == vocab.end()) {
                throw DataError("label '" + cell + "' at data row " + std::to_string(i + 1) +
                                " was not in the training vocabulary");
            }
            data.labels.push_back(it->second);
        }
    }

    data = apply_normalizer(model.normalizer, data);
    if (model.has_intercept) data = add_intercept(data);
    return data;
}

} // namespace scpo
