#pragma once

#include "scpo/dataset.hpp"
#include "scpo/surrogate.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace scpo {

enum class ModelKind { scpo_linear, multinomial };

std::string model_kind_name(ModelKind kind);

/// Everything needed to apply a trained model to new CSV data: the weight
/// matrix, the preprocessing learned on the training set (column schema,
/// imputation/centering means, scales, intercept flag), the label vocabulary,
/// and optionally the calibration scores that make it a conformal predictor.
struct ModelFile {
    int schema_version = 1;
    ModelKind kind = ModelKind::scpo_linear;
    Eigen::MatrixXd weights;  // m x C (m includes the intercept column if any)

    std::vector<std::string> feature_names;  // raw CSV columns, in order
    std::string label_column;
    std::vector<std::string> label_names;  // class index y <-> label_names[y-1]
    bool has_intercept = true;
    Normalizer normalizer;  // fitted over the raw feature columns (+ intercept)

    std::optional<Hyperparams> hyperparams;  // present for surrogate-trained models
    std::optional<std::string> ineff_name;   // efficiency criterion used in training

    std::optional<Eigen::VectorXd> calibration_alphas;  // sorted ascending
};

/// Serialize to JSON. Doubles survive a save/load round trip bit-exactly.
void save_model(const ModelFile& model, const std::string& path);

/// Parse a model file; malformed or unreadable input raises DataError.
ModelFile load_model(const std::string& path);

/// Assemble a feature matrix (and labels, when required) from a CSV using the
/// model's stored schema: select the stored feature columns by name, fill
/// missing cells with the stored means, normalize, and append the intercept
/// if the model was trained with one. With `require_labels` true the label
/// column must exist and every value must map through the stored vocabulary
/// (an unseen label is a DataError); with it false the label column is
/// ignored and the result carries no labels.
Dataset dataset_for_model(const ModelFile& model, const std::string& csv_path,
                          bool require_labels);

} // namespace scpo
